#include "bmf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "bmf/errors.hpp"

namespace bmf {

namespace {

void require_nonempty(std::span<const ForecastRecord> records) {
  if (records.empty()) throw Error(Err::EmptyInput, "no forecast records");
}

}  // namespace

double mae(std::span<const ForecastRecord> records) {
  require_nonempty(records);
  double s = 0.0;
  for (const auto& r : records) s += std::abs(r.y_true - r.y_pred);
  return s / static_cast<double>(records.size());
}

double rmse(std::span<const ForecastRecord> records) {
  require_nonempty(records);
  double s = 0.0;
  for (const auto& r : records) {
    const double e = r.y_true - r.y_pred;
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(records.size()));
}

double smape(std::span<const ForecastRecord> records) {
  require_nonempty(records);
  double s = 0.0;
  for (const auto& r : records) {
    const double denom = std::abs(r.y_true) + std::abs(r.y_pred);
    if (denom > 0.0) s += std::abs(r.y_true - r.y_pred) / denom;
  }
  return 100.0 * s / static_cast<double>(records.size());
}

MetricSet metrics(std::span<const ForecastRecord> records) {
  return {mae(records), rmse(records), smape(records), records.size()};
}

HourlyBreakdown hourly_breakdown(std::span<const ForecastRecord> records) {
  require_nonempty(records);
  HourlyBreakdown hb;

  // Price stats from distinct target timestamps.
  std::set<Ts> seen;
  std::array<double, 24> sum{}, sumsq{};
  std::array<std::size_t, 24> nprice{};
  for (const auto& r : records) {
    if (!seen.insert(r.target_ts).second) continue;
    const int h = hour_of_day(r.target_ts);
    sum[h] += r.y_true;
    sumsq[h] += r.y_true * r.y_true;
    ++nprice[h];
  }
  for (int h = 0; h < 24; ++h) {
    if (nprice[h] == 0) continue;
    const double n = static_cast<double>(nprice[h]);
    hb.mean_price[h] = sum[h] / n;
    hb.sd_price[h] = std::sqrt(std::max(0.0, sumsq[h] / n - hb.mean_price[h] * hb.mean_price[h]));
  }

  std::map<std::string, std::array<double, 24>> err;
  std::map<std::string, std::array<std::size_t, 24>> cnt;
  for (const auto& r : records) {
    const int h = hour_of_day(r.target_ts);
    ++hb.count[h];
    err[r.model][h] += std::abs(r.y_true - r.y_pred);
    ++cnt[r.model][h];
  }
  for (auto& [model, e] : err) {
    auto& out = hb.model_mae[model];
    for (int h = 0; h < 24; ++h) {
      out[h] = cnt[model][h] ? e[h] / static_cast<double>(cnt[model][h]) : 0.0;
    }
  }
  return hb;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

DmResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b,
                 int horizon) {
  if (loss_a.size() != loss_b.size()) throw Error(Err::ShapeMismatch, "loss lengths");
  const std::size_t n = loss_a.size();
  if (n < 30) throw Error(Err::InsufficientData, "DM test needs n >= 30");

  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = loss_a[i] - loss_b[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);

  // HAC long-run variance, Bartlett kernel, lag = horizon - 1.
  const int max_lag = std::min<int>(horizon - 1, static_cast<int>(n) - 1);
  double lrv = 0.0;
  for (int lag = 0; lag <= max_lag; ++lag) {
    double gamma = 0.0;
    for (std::size_t i = lag; i < n; ++i) gamma += (d[i] - mean) * (d[i - lag] - mean);
    gamma /= static_cast<double>(n);
    const double weight = lag == 0 ? 1.0 : 2.0 * (1.0 - double(lag) / double(max_lag + 1));
    lrv += weight * gamma;
  }

  DmResult res;
  if (lrv <= 0.0) {
    res.degenerate = true;
    return res;
  }
  res.statistic = mean / std::sqrt(lrv / static_cast<double>(n));
  res.p_value = normal_cdf(res.statistic);  // H1: mean d < 0
  res.reject = res.p_value < 0.05;
  return res;
}

DmMatrix dm_matrix(std::span<const ForecastRecord> records, int horizon) {
  require_nonempty(records);
  std::map<std::string, std::vector<const ForecastRecord*>> by_model;
  for (const auto& r : records) by_model[r.model].push_back(&r);

  DmMatrix m;
  std::map<std::string, std::vector<double>> losses;
  for (auto& [model, recs] : by_model) {
    std::sort(recs.begin(), recs.end(), [](const ForecastRecord* a, const ForecastRecord* b) {
      if (a->target_ts != b->target_ts) return a->target_ts < b->target_ts;
      return a->origin_ts < b->origin_ts;
    });
    auto& l = losses[model];
    l.reserve(recs.size());
    for (const auto* r : recs) l.push_back(std::abs(r->y_true - r->y_pred));
    m.models.push_back(model);
  }
  const std::size_t k = m.models.size();
  for (std::size_t a = 0; a < k; ++a) {
    if (losses[m.models[a]].size() != losses[m.models[0]].size()) {
      throw Error(Err::ShapeMismatch, "models have unequal record counts");
    }
  }
  m.cell.assign(k, std::vector<DmResult>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      m.cell[a][b] = dm_test(losses[m.models[a]], losses[m.models[b]], horizon);
    }
  }
  return m;
}

}  // namespace bmf
