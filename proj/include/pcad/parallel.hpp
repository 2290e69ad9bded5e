#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>

#ifdef PCAD_HAVE_OPENMP
#include <omp.h>
#endif

namespace pcad {

/// Caps the worker count used by parallel_for. Values < 1 restore the default.
void set_worker_count(int workers);
int worker_count();

/// Runs fn(i) for i in [0, n). Iterations must only write disjoint state.
/// The first exception thrown by any iteration is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  const auto count = static_cast<std::int64_t>(n);
#ifdef PCAD_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_count())
#endif
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#ifdef PCAD_HAVE_OPENMP
#pragma omp critical(pcad_parallel_error)
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace pcad
