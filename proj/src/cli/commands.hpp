#pragma once

// Command-line front end: generate, train, evaluate, reproduce.
// Exit codes: 0 success, 1 runtime or check failure, 2 usage error.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcad/dataset.hpp"
#include "pcad/lrt.hpp"

namespace pcad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct GenerateOptions {
  std::size_t antennas = 256;
  std::string grid = "train";  // train | test | custom
  std::vector<double> snr_db;
  std::vector<std::size_t> users;
  std::vector<double> pe;
  std::size_t trials = 100;
  std::size_t pilot_length = kDefaultPilotLength;
  std::string mode = "fast";
  std::filesystem::path out;
  std::uint64_t seed = 0;
};

struct TrainOptions {
  std::filesystem::path data;
  std::optional<int> depth;
  std::vector<int> depths{1, 2, 3, 4, 5};
  std::size_t folds = 10;
  std::filesystem::path model_out;
  std::filesystem::path report;
  bool allow_unbalanced = false;
  std::uint64_t seed = 0;
};

struct EvaluateOptions {
  std::filesystem::path model;
  std::filesystem::path data;
  std::vector<double> filter_snr;
  std::vector<int> filter_users;
  std::vector<double> filter_pe;
  std::filesystem::path breakdown;
};

struct ReproduceOptions {
  std::string figure;
  std::filesystem::path out_dir;
  std::filesystem::path model;
  std::optional<std::size_t> trials;
  std::string mode = "fast";
  std::string lrt_noise = "received";
  bool check = false;
  std::uint64_t seed = 0;
};

/// Builds the resolved grid for `generate` (validated).
GridSpec resolve_grid(const GenerateOptions& o);

int cmd_generate(const GenerateOptions& o, const std::string& config_digest, std::ostream& out);
int cmd_train(const TrainOptions& o, const std::string& config_digest, std::ostream& out);
int cmd_evaluate(const EvaluateOptions& o, std::ostream& out);
int cmd_reproduce(const ReproduceOptions& o, const std::string& config_digest, std::ostream& out);

/// Parses argv (with optional --config INI file, one section per command;
/// flags override file values) and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcad::cli
