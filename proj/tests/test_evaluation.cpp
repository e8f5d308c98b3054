#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <random>

#include "bmf/errors.hpp"
#include "bmf/evaluation.hpp"
#include "doctest.h"

using namespace bmf;

namespace {

std::vector<ForecastRecord> records_from_errors(const std::vector<double>& errs) {
  std::vector<ForecastRecord> recs(errs.size());
  for (std::size_t i = 0; i < errs.size(); ++i) {
    recs[i].y_true = 10.0;
    recs[i].y_pred = 10.0 + errs[i];
    recs[i].target_ts = Ts(i) * 30;
    recs[i].model = "m";
  }
  return recs;
}

}  // namespace

TEST_CASE("mae and rmse hand values") {
  auto perfect = records_from_errors({0, 0, 0});
  CHECK(mae(perfect) == 0.0);
  CHECK(rmse(perfect) == 0.0);

  auto recs = records_from_errors({1, -1, 3});
  CHECK(mae(recs) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(rmse(recs) == doctest::Approx(std::sqrt(11.0 / 3.0)).epsilon(1e-12));
  CHECK(mae(recs) <= rmse(recs));

  CHECK_THROWS_AS((void)mae(std::vector<ForecastRecord>{}), Error);
}

TEST_CASE("smape matches the definition including 0/0") {
  std::vector<ForecastRecord> recs(1);
  recs[0].y_true = 5.0;
  recs[0].y_pred = 5.0;
  CHECK(smape(recs) == 0.0);

  recs[0].y_true = 1.0;
  recs[0].y_pred = 0.0;
  CHECK(smape(recs) == doctest::Approx(100.0).epsilon(1e-12));

  recs.resize(2);
  recs[0].y_true = 2.0;
  recs[0].y_pred = 1.0;
  recs[1].y_true = 0.0;
  recs[1].y_pred = 0.0;
  CHECK(smape(recs) == doctest::Approx(100.0 / 2.0 * (1.0 / 3.0)).epsilon(1e-12));
  CHECK(std::isfinite(smape(recs)));
}

TEST_CASE("metric oracles on random record sets") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-50.0, 150.0);
  std::uniform_int_distribution<int> len(1, 60);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(rng);
    std::vector<ForecastRecord> recs(n);
    double sum_abs = 0.0, sum_sq = 0.0, sum_sm = 0.0;
    for (int i = 0; i < n; ++i) {
      recs[i].y_true = u(rng);
      recs[i].y_pred = u(rng);
      const double e = recs[i].y_true - recs[i].y_pred;
      sum_abs += std::abs(e);
      sum_sq += e * e;
      const double denom = std::abs(recs[i].y_true) + std::abs(recs[i].y_pred);
      if (denom > 0.0) sum_sm += std::abs(e) / denom;
    }
    const MetricSet m = metrics(recs);
    CHECK(std::abs(m.mae - sum_abs / n) < 1e-12 * (1.0 + sum_abs));
    CHECK(std::abs(m.rmse - std::sqrt(sum_sq / n)) < 1e-12 * (1.0 + m.rmse));
    CHECK(std::abs(m.smape - 100.0 / n * sum_sm) < 1e-10);
    CHECK(m.n == std::size_t(n));
  }
}

TEST_CASE("smape symmetry and metric scaling") {
  std::vector<ForecastRecord> recs(3);
  std::vector<ForecastRecord> swapped(3);
  std::vector<ForecastRecord> scaled(3);
  const double vals[3][2] = {{10.0, 12.0}, {-4.0, 3.0}, {0.5, 0.25}};
  for (int i = 0; i < 3; ++i) {
    recs[i].y_true = vals[i][0];
    recs[i].y_pred = vals[i][1];
    swapped[i].y_true = vals[i][1];
    swapped[i].y_pred = vals[i][0];
    scaled[i].y_true = 3.0 * vals[i][0];
    scaled[i].y_pred = 3.0 * vals[i][1];
  }
  CHECK(smape(recs) == doctest::Approx(smape(swapped)).epsilon(1e-12));
  CHECK(mae(scaled) == doctest::Approx(3.0 * mae(recs)).epsilon(1e-12));
  CHECK(rmse(scaled) == doctest::Approx(3.0 * rmse(recs)).epsilon(1e-12));
  CHECK(smape(scaled) == doctest::Approx(smape(recs)).epsilon(1e-12));
}

TEST_CASE("hourly breakdown: constant prices, counts, pooled consistency") {
  // Two models over 48 half-hour targets spanning one day.
  std::vector<ForecastRecord> recs;
  const Ts t0 = 0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 48; ++i) {
    for (const char* model : {"a", "b"}) {
      ForecastRecord r;
      r.target_ts = t0 + Ts(i) * 30;
      r.y_true = 50.0;
      r.y_pred = 50.0 + u(rng);
      r.model = model;
      recs.push_back(r);
    }
  }
  HourlyBreakdown hb = hourly_breakdown(recs);
  std::size_t total = 0;
  for (int h = 0; h < 24; ++h) {
    CHECK(hb.mean_price[h] == 50.0);
    CHECK(hb.sd_price[h] == 0.0);
    total += hb.count[h];
  }
  CHECK(total == recs.size());

  // Pooled MAE equals the count-weighted mean of hourly MAEs per model.
  for (const char* model : {"a", "b"}) {
    std::vector<ForecastRecord> own;
    for (const auto& r : recs)
      if (r.model == model) own.push_back(r);
    double weighted = 0.0;
    for (int h = 0; h < 24; ++h) weighted += hb.model_mae[model][h] * 2.0;
    weighted /= double(own.size());
    CHECK(weighted == doctest::Approx(mae(own)).epsilon(1e-12));
  }
}

TEST_CASE("dm test: degenerate, one-sided rejection, antisymmetry") {
  std::vector<double> a(100, 1.0);
  DmResult same = dm_test(a, a);
  CHECK(same.degenerate);
  CHECK_FALSE(same.reject);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> la(1000), lb(1000);
  for (int i = 0; i < 1000; ++i) {
    const double n1 = std::abs(noise(rng));
    la[i] = n1;
    lb[i] = n1 + 0.8 + 0.1 * noise(rng);
  }
  DmResult r = dm_test(la, lb);
  CHECK(r.reject);
  CHECK(r.p_value < 0.05);
  DmResult rev = dm_test(lb, la);
  CHECK(rev.statistic == -r.statistic);  // exact IEEE negation
  CHECK_FALSE(rev.reject);

  std::vector<double> shorty(10, 1.0);
  CHECK_THROWS_AS((void)dm_test(shorty, shorty), Error);
  std::vector<double> mismatched(1000, 1.0);
  mismatched.pop_back();
  CHECK_THROWS_AS((void)dm_test(la, mismatched), Error);
}

TEST_CASE("dm statistic matches an independent HAC computation") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int n = 200;
  std::vector<double> la(n), lb(n);
  for (int i = 0; i < n; ++i) {
    la[i] = std::abs(noise(rng));
    lb[i] = std::abs(noise(rng)) + 0.1;
  }
  const int horizon = 16;
  DmResult r = dm_test(la, lb, horizon);

  // Scripted reference: d_i = la - lb, Bartlett HAC with max_lag = 15.
  std::vector<double> d(n);
  double dbar = 0.0;
  for (int i = 0; i < n; ++i) {
    d[i] = la[i] - lb[i];
    dbar += d[i];
  }
  dbar /= n;
  const int max_lag = horizon - 1;
  double lrv = 0.0;
  for (int lag = 0; lag <= max_lag; ++lag) {
    double gamma = 0.0;
    for (int i = lag; i < n; ++i) gamma += (d[i] - dbar) * (d[i - lag] - dbar);
    gamma /= n;
    const double w = lag == 0 ? 1.0 : 2.0 * (1.0 - double(lag) / double(max_lag + 1));
    lrv += w * gamma;
  }
  const double stat = dbar / std::sqrt(lrv / n);
  CHECK(r.statistic == doctest::Approx(stat).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(normal_cdf(stat)).epsilon(1e-12));
}

TEST_CASE("dm matrix decisions are never mutually rejecting") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<ForecastRecord> recs;
  for (int i = 0; i < 200; ++i) {
    for (const char* model : {"good", "bad", "same"}) {
      ForecastRecord r;
      r.target_ts = Ts(i) * 30;
      r.origin_ts = Ts(i) * 30 - 480;
      r.y_true = 10.0;
      const double base = std::abs(noise(rng));
      r.y_pred = 10.0 + base + (model[0] == 'b' ? 1.0 : 0.0);
      r.model = model;
      recs.push_back(r);
    }
  }
  DmMatrix m = dm_matrix(recs);
  REQUIRE(m.models.size() == 3);
  for (std::size_t a2 = 0; a2 < 3; ++a2) {
    for (std::size_t b2 = 0; b2 < 3; ++b2) {
      if (a2 == b2) continue;
      const bool both = m.cell[a2][b2].reject && m.cell[b2][a2].reject;
      CHECK_FALSE(both);
    }
  }
}

TEST_CASE("normal cdf reference points") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normal_cdf(-1.6448536269514722) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
}
