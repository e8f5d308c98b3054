#pragma once

#include <cstddef>
#include <functional>

namespace bmf {

// Worker cap: BMF_THREADS env var, else hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, n). With parallel=true the iterations are spread
// over OpenMP threads; results must not depend on the execution order, so
// serial and parallel runs are interchangeable. The serial path is the
// reference used by tests and the benchmark.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  bool parallel = true);

}  // namespace bmf
