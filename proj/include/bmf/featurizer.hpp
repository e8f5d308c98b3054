#pragma once

#include <array>
#include <string>
#include <vector>

#include "bmf/matrix.hpp"
#include "bmf/timeseries.hpp"

namespace bmf {

// One feature block: a contiguous run of offsets of one variable relative
// to the forecast origin t, inclusive on both ends.
struct FeatureBlock {
  const char* name;
  Field field;
  int offset_start;
  int offset_end;

  int length() const { return offset_end - offset_start + 1; }
};

// Fixed block layout. Historical blocks come first (49 offsets each), then
// the future-looking blocks (16 each): 245 + 80 = 325 features.
extern const std::array<FeatureBlock, 10> kFeatureBlocks;

inline constexpr int kFeatureDim = 325;
inline constexpr int kHorizon = 16;
inline constexpr int kTargetOffsetStart = 2;   // periods t and t+1 are closed
inline constexpr int kTargetOffsetEnd = 17;
inline constexpr int kMinHistory = 51;         // deepest lag is t-51
inline constexpr int kMinFuture = 17;

struct Sample {
  Ts origin_ts = 0;
  std::array<double, kFeatureDim> x{};
  std::array<double, kHorizon> y{};
  std::array<int, kHorizon> hour_of_target{};
};

struct DatasetMeta {
  std::vector<Ts> origin_ts;                       // one per row
  std::vector<std::array<int, kHorizon>> target_hours;
};

Sample make_sample(const SettlementSeries& series, Ts origin_ts);

// Row i equals make_sample(series, origins[i]); order preserved.
void make_dataset(const SettlementSeries& series, const std::vector<Ts>& origins,
                  Matrix& x, Matrix& y, DatasetMeta& meta);

// Column headers for the optional dump: bmp_m51..dam_p16, y_p2..y_p17.
std::vector<std::string> feature_column_names();
std::vector<std::string> target_column_names();

void dump_dataset_csv(const Matrix& x, const Matrix& y, const DatasetMeta& meta,
                      const std::string& path);

}  // namespace bmf
