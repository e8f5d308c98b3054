#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bmf/time.hpp"

namespace bmf {

// Column order of the canonical CSV (after ts).
enum Field : int {
  kBmp = 0,   // balancing market price, EUR/MWh
  kBmv,       // balancing market volume, MWh
  kWdiff,     // forecast minus actual wind, MW
  kInter,     // interconnector flow, MW
  kDam,       // day-ahead price, hourly value repeated per half hour
  kPhpn,      // physical notifications volume, MW
  kPhi,       // net interconnector schedule, MW
  kPhfw,      // renewables forecast, MW
  kPhfd,      // demand forecast, MW
  kFieldCount
};

extern const std::array<const char*, kFieldCount> kFieldNames;

struct SettlementRecord {
  Ts ts = 0;
  std::array<double, kFieldCount> v{};

  double bmp() const { return v[kBmp]; }
  double dam() const { return v[kDam]; }

  bool operator==(const SettlementRecord&) const = default;
};

// Minimum series length before any sample can be built: deepest lag t-51
// plus the origin row plus leads out to t+17.
inline constexpr std::size_t kMinSeriesLen = 52 + 17;

class SettlementSeries {
 public:
  SettlementSeries() = default;
  explicit SettlementSeries(std::vector<SettlementRecord> records);

  std::size_t size() const { return records_.size(); }
  const SettlementRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<SettlementRecord>& records() const { return records_; }

  // Exact lookup; no nearest-match semantics.
  std::optional<std::size_t> index_of(Ts ts) const;

  Ts front_ts() const { return records_.front().ts; }
  Ts back_ts() const { return records_.back().ts; }

  bool operator==(const SettlementSeries&) const = default;

 private:
  std::vector<SettlementRecord> records_;
};

enum class FillPolicy { kReject, kForwardFill };

struct IngestStats {
  std::size_t rows = 0;
  std::size_t filled_cells = 0;
  std::size_t filled_rows = 0;
};

// Validates and indexes the canonical wide CSV. Forward fill repairs
// isolated missing cells and gaps of at most kMaxFillGap consecutive
// missing rows; anything longer is an error, never fabricated.
inline constexpr int kMaxFillGap = 4;

SettlementSeries ingest_csv(const std::string& path, FillPolicy policy,
                            IngestStats* stats = nullptr);
SettlementSeries ingest_csv_text(const std::string& text, FillPolicy policy,
                                 IngestStats* stats = nullptr);

void write_csv(const SettlementSeries& series, const std::string& path);
std::string to_csv_text(const SettlementSeries& series);

// Synthetic generator: mean-reverting daily-seasonal price with additive
// jump spikes, plus exogenous columns tied to the price via fixed loadings.
struct SynthParams {
  double mean_price = 60.0;      // EUR/MWh level
  double season_amp1 = 25.0;     // daily harmonic
  double season_amp2 = 8.0;      // half-daily harmonic
  double ar_phi = 0.7;           // AR(1) pull on the 30-minute grid
  double ar_sigma = 9.0;
  double innovation_clamp = 2.5; // innovations truncated at clamp*sigma
  double jump_scale = 3.0;       // min jump = jump_scale * stationary_bound()
  double exo_noise = 0.05;       // relative noise on exogenous loadings

  // Hard bound on |bmp - seasonal| when spike_prob = 0 (truncated AR(1)).
  double stationary_bound() const {
    return innovation_clamp * ar_sigma / (1.0 - ar_phi);
  }
};

// Deterministic seasonal component used by the generator; exposed so tests
// can scan a generated series for spikes.
double synth_seasonal(const SynthParams& p, int period_of_day);

SettlementSeries synthesize(int n_days, std::uint64_t seed, double spike_prob,
                            const SynthParams& params = {});

}  // namespace bmf
