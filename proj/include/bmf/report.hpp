#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bmf/backtester.hpp"
#include "bmf/evaluation.hpp"

namespace bmf {

// 64-bit FNV-1a, used for manifest content hashes.
std::uint64_t fnv1a(std::span<const char> bytes);
std::uint64_t fnv1a_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

std::string forecasts_csv(std::span<const ForecastRecord> records);

// One row per (model, training window) pair.
std::string metrics_csv(std::span<const ForecastRecord> records);

// Per-hour price mean/sd plus one MAE column per model.
std::string hourly_csv(const HourlyBreakdown& hb);

// Pairwise decisions as {1,0}; empty diagonal; 'nd' when the HAC variance is
// degenerate.
std::string dm_matrix_csv(const DmMatrix& m);

std::string timing_csv(const std::map<std::string, std::vector<double>>& fit_seconds);

// Minimal hand-emitted SVG: one polyline per model over the 24 hours.
std::string hourly_svg(const HourlyBreakdown& hb);
// Bar chart of mean fit seconds per model.
std::string timing_svg(const std::map<std::string, std::vector<double>>& fit_seconds);

struct RunManifest {
  std::string config_text;
  std::string dataset_hash;
  std::string code_version;
  std::uint64_t seed = 0;
  // Deterministic outputs carry content hashes; volatile ones (timings) are
  // listed without a hash so two runs of the same plan compare equal.
  std::vector<std::pair<std::string, std::string>> outputs;
  std::vector<std::string> volatile_outputs;
  std::map<std::string, double> stage_seconds;  // volatile

  std::string to_json() const;
  // Hash over the deterministic portion only.
  std::string manifest_hash() const;
};

// Writes the full bundle into out_dir and returns the manifest.
RunManifest write_report_bundle(const BacktestReport& report, const std::string& out_dir,
                                const std::string& config_text,
                                const std::string& dataset_hash);

}  // namespace bmf
