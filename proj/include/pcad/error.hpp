#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcad {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested more orthogonal pilots than the pilot length allows.
class InfeasiblePilotSet : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A sweep needs a trained decision tree and none was supplied.
class ModelRequired : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pcad
