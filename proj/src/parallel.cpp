#include "bmf/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bmf {

int worker_count() {
  if (const char* env = std::getenv("BMF_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  bool parallel) {
#ifdef _OPENMP
  const int workers = parallel ? worker_count() : 1;
  if (workers > 1 && n > 1) {
    std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#else
  (void)parallel;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace bmf
