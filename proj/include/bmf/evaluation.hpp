#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bmf/time.hpp"

namespace bmf {

// One scored forecast point: origin, horizon and both prices.
struct ForecastRecord {
  Ts origin_ts = 0;
  int horizon = 0;        // k in [0,15]; target_ts = origin_ts + (k+2)*30min
  Ts target_ts = 0;
  double y_true = 0.0;
  double y_pred = 0.0;
  std::string model;
  int training_window = 0;  // days
  int tuning_epoch = 0;
};

struct MetricSet {
  double mae = 0.0;
  double rmse = 0.0;
  double smape = 0.0;  // percent
  std::size_t n = 0;
};

double mae(std::span<const ForecastRecord> records);
double rmse(std::span<const ForecastRecord> records);
// Symmetric MAPE: 100/n * sum |y-yh| / (|y|+|yh|), 0/0 terms are 0.
double smape(std::span<const ForecastRecord> records);
MetricSet metrics(std::span<const ForecastRecord> records);

struct HourlyBreakdown {
  std::array<double, 24> mean_price{};
  std::array<double, 24> sd_price{};
  std::array<std::size_t, 24> count{};                    // scored points per hour
  std::map<std::string, std::array<double, 24>> model_mae;
};

// Groups by hour of target_ts. Price stats are over distinct target
// timestamps (records repeat y_true across models and overlapping origins).
HourlyBreakdown hourly_breakdown(std::span<const ForecastRecord> records);

struct DmResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;       // model A significantly more accurate at 95%
  bool degenerate = false;   // HAC variance <= 0: no decision
};

// One-sided Diebold-Mariano on the absolute-error differential
// d_i = |e_a,i| - |e_b,i|, HAC long-run variance with Bartlett weights and
// lag = horizon - 1. H1: model A more accurate (mean d < 0).
DmResult dm_test(std::span<const double> loss_a, std::span<const double> loss_b,
                 int horizon = 16);

struct DmMatrix {
  std::vector<std::string> models;
  std::vector<std::vector<DmResult>> cell;  // [row a][col b], diagonal unused
};

// Pairwise DM over per-model record sets; loss series are absolute errors
// aligned by (target_ts, origin_ts) order.
DmMatrix dm_matrix(std::span<const ForecastRecord> records, int horizon = 16);

double normal_cdf(double z);

}  // namespace bmf
