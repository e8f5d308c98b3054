#include "bmf/featurizer.hpp"

#include <fstream>

#include "bmf/errors.hpp"

namespace bmf {

const std::array<FeatureBlock, 10> kFeatureBlocks = {{
    {"bmp", kBmp, -51, -3},
    {"bmv", kBmv, -51, -3},
    {"wdiff", kWdiff, -51, -3},
    {"inter", kInter, -50, -2},
    {"dam", kDam, -48, 0},
    {"phpn", kPhpn, 2, 17},
    {"phi", kPhi, 2, 17},
    {"phfw", kPhfw, 2, 17},
    {"phfd", kPhfd, 2, 17},
    {"dam", kDam, 1, 16},
}};

Sample make_sample(const SettlementSeries& series, Ts origin_ts) {
  const auto idx = series.index_of(origin_ts);
  if (!idx) {
    throw Error(Err::InvalidParam, "origin " + format_ts(origin_ts) + " not in series");
  }
  const std::size_t i = *idx;
  if (i < kMinHistory) {
    throw Error(Err::InsufficientHistory,
                "origin " + format_ts(origin_ts) + " has only " + std::to_string(i) +
                    " predecessors (need " + std::to_string(kMinHistory) + ")");
  }
  if (i + kMinFuture >= series.size()) {
    throw Error(Err::InsufficientFuture,
                "origin " + format_ts(origin_ts) + " lacks " +
                    std::to_string(kMinFuture) + " successors");
  }

  Sample s;
  s.origin_ts = origin_ts;
  int pos = 0;
  for (const auto& block : kFeatureBlocks) {
    for (int off = block.offset_start; off <= block.offset_end; ++off) {
      s.x[pos++] = series[i + off].v[block.field];
    }
  }
  for (int k = 0; k < kHorizon; ++k) {
    const auto& rec = series[i + kTargetOffsetStart + k];
    s.y[k] = rec.v[kBmp];
    s.hour_of_target[k] = hour_of_day(rec.ts);
  }
  return s;
}

void make_dataset(const SettlementSeries& series, const std::vector<Ts>& origins,
                  Matrix& x, Matrix& y, DatasetMeta& meta) {
  const std::size_t n = origins.size();
  x = Matrix(n, kFeatureDim);
  y = Matrix(n, kHorizon);
  meta.origin_ts.resize(n);
  meta.target_hours.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    Sample s;
    try {
      s = make_sample(series, origins[r]);
    } catch (const Error& e) {
      throw Error(e.kind(), "origin " + format_ts(origins[r]) + " (row " +
                                std::to_string(r) + "): " + e.what());
    }
    for (int c = 0; c < kFeatureDim; ++c) x(r, c) = s.x[c];
    for (int c = 0; c < kHorizon; ++c) y(r, c) = s.y[c];
    meta.origin_ts[r] = s.origin_ts;
    meta.target_hours[r] = s.hour_of_target;
  }
}

namespace {

std::string offset_name(const char* block, int off) {
  return std::string(block) + (off < 0 ? "_m" : "_p") + std::to_string(off < 0 ? -off : off);
}

}  // namespace

std::vector<std::string> feature_column_names() {
  std::vector<std::string> names;
  names.reserve(kFeatureDim);
  for (const auto& block : kFeatureBlocks) {
    for (int off = block.offset_start; off <= block.offset_end; ++off) {
      names.push_back(offset_name(block.name, off));
    }
  }
  return names;
}

std::vector<std::string> target_column_names() {
  std::vector<std::string> names;
  for (int k = 0; k < kHorizon; ++k) {
    names.push_back("y_p" + std::to_string(kTargetOffsetStart + k));
  }
  return names;
}

void dump_dataset_csv(const Matrix& x, const Matrix& y, const DatasetMeta& meta,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot write " + path);
  out << "origin_ts";
  for (const auto& n : feature_column_names()) out << ',' << n;
  for (const auto& n : target_column_names()) out << ',' << n;
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    out << format_ts(meta.origin_ts[r]);
    for (std::size_t c = 0; c < x.cols(); ++c) out << ',' << x(r, c);
    for (std::size_t c = 0; c < y.cols(); ++c) out << ',' << y(r, c);
    out << '\n';
  }
}

}  // namespace bmf
