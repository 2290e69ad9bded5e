#include "pcad/parallel.hpp"

#include <atomic>

namespace pcad {

namespace {
std::atomic<int> g_workers{0};
}

void set_worker_count(int workers) { g_workers.store(workers > 0 ? workers : 0); }

int worker_count() {
  const int w = g_workers.load();
  if (w > 0) return w;
#ifdef PCAD_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace pcad
