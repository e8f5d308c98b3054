#include <chrono>
#include <cstdio>

#include "bmf/featurizer.hpp"
#include "bmf/linmodels.hpp"
#include "bmf/parallel.hpp"
#include "bmf/timeseries.hpp"
#include "bmf/treemodels.hpp"

using namespace bmf;
using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <class Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, seconds(t0, Clock::now()));
  }
  return best;
}

}  // namespace

int main() {
  std::printf("workers: %d\n", worker_count());

  const SettlementSeries series = synthesize(40, 42, 0.01);
  std::vector<Ts> origins;
  for (std::size_t i = kMinHistory; i + kMinFuture < series.size(); i += 4) {
    origins.push_back(series[i].ts);
  }
  Matrix x, y;
  DatasetMeta meta;
  make_dataset(series, origins, x, y, meta);
  std::printf("dataset: %zu rows x %zu features\n", x.rows(), x.cols());

  {
    LearOptions serial{.max_knots = 40, .parallel = false};
    LearOptions parallel{.max_knots = 40, .parallel = true};
    const double ts = time_best_of(3, [&] { (void)lear_fit(x, y, serial); });
    const double tp = time_best_of(3, [&] { (void)lear_fit(x, y, parallel); });
    std::printf("lear_fit      serial %.3fs  parallel %.3fs  speedup %.2fx\n", ts, tp,
                ts / tp);
  }

  {
    ForestParams serial{.n_trees = 40, .max_depth = 8, .parallel = false};
    ForestParams parallel{.n_trees = 40, .max_depth = 8, .parallel = true};
    const double ts = time_best_of(3, [&] { (void)rf_fit(x, y, serial, 7); });
    const double tp = time_best_of(3, [&] { (void)rf_fit(x, y, parallel, 7); });
    std::printf("rf_fit        serial %.3fs  parallel %.3fs  speedup %.2fx\n", ts, tp,
                ts / tp);
  }

  {
    GbtParams serial{.n_rounds = 20, .max_depth = 4, .parallel = false};
    GbtParams parallel{.n_rounds = 20, .max_depth = 4, .parallel = true};
    const double ts = time_best_of(3, [&] { (void)gbt_fit(x, y, serial, 7); });
    const double tp = time_best_of(3, [&] { (void)gbt_fit(x, y, parallel, 7); });
    std::printf("gbt_fit       serial %.3fs  parallel %.3fs  speedup %.2fx\n", ts, tp,
                ts / tp);
  }
  return 0;
}
