#include "bmf/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "bmf/errors.hpp"

namespace bmf {

const std::array<const char*, kFieldCount> kFieldNames = {
    "bmp", "bmv", "wdiff", "inter", "dam", "phpn", "phi", "phfw", "phfd"};

SettlementSeries::SettlementSeries(std::vector<SettlementRecord> records)
    : records_(std::move(records)) {}

std::optional<std::size_t> SettlementSeries::index_of(Ts ts) const {
  if (records_.empty()) return std::nullopt;
  const Ts t0 = records_.front().ts;
  if (ts < t0 || (ts - t0) % kPeriodMinutes != 0) return std::nullopt;
  const std::size_t i = static_cast<std::size_t>((ts - t0) / kPeriodMinutes);
  if (i >= records_.size()) return std::nullopt;
  return i;
}

namespace {

constexpr const char* kHeader = "ts,bmp,bmv,wdiff,inter,dam,phpn,phi,phfw,phfd";

struct RawRow {
  Ts ts;
  std::array<std::optional<double>, kFieldCount> v;
  std::size_t line;
};

std::optional<double> parse_cell(const std::string& cell, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  char* end = nullptr;
  double d = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw Error(Err::NonFiniteValue,
                "unparseable value '" + cell + "' at line " + std::to_string(line));
  }
  if (!std::isfinite(d)) {
    throw Error(Err::NonFiniteValue,
                "non-finite value at line " + std::to_string(line));
  }
  return d;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// Repairs the DAM hourly-constancy invariant on rows created by forward
// fill: a filled half hour takes the dam of its original hour mate.
void fix_dam_for_fills(std::vector<SettlementRecord>& recs,
                       const std::vector<bool>& filled) {
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const bool first_half = (recs[i].ts % 60) == 0;
    const std::size_t mate = first_half ? i + 1 : i - 1;
    if (mate >= recs.size()) continue;
    if (recs[i].ts / 60 != recs[mate].ts / 60) continue;
    if (filled[i] && !filled[mate]) recs[i].v[kDam] = recs[mate].v[kDam];
  }
}

void validate_dam(const std::vector<SettlementRecord>& recs) {
  for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
    if (recs[i].ts / 60 == recs[i + 1].ts / 60 &&
        recs[i].v[kDam] != recs[i + 1].v[kDam]) {
      throw Error(Err::NonConstantDam,
                  "dam differs within hour at " + format_ts(recs[i].ts));
    }
  }
}

SettlementSeries ingest_rows(const std::vector<RawRow>& rows, FillPolicy policy,
                             IngestStats* stats) {
  IngestStats st;
  std::vector<SettlementRecord> recs;
  std::vector<bool> filled;
  std::array<int, kFieldCount> missing_run{};

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!recs.empty()) {
      const Ts prev = recs.back().ts;
      const Ts cur = rows[i].ts;
      if (cur <= prev) {
        throw Error(Err::NonMonotonicTimestamp,
                    "timestamp " + format_ts(cur) + " at line " +
                        std::to_string(rows[i].line) + " not after " + format_ts(prev));
      }
      const Ts gap = (cur - prev) / kPeriodMinutes - 1;
      if ((cur - prev) % kPeriodMinutes != 0) {
        throw Error(Err::NonMonotonicTimestamp,
                    "timestamp " + format_ts(cur) + " off the 30-minute grid");
      }
      if (gap > 0) {
        if (policy == FillPolicy::kReject) {
          throw Error(Err::NonMonotonicTimestamp,
                      std::to_string(gap) + " missing row(s) before " + format_ts(cur));
        }
        if (gap > kMaxFillGap) {
          throw Error(Err::GapExceedsLimit,
                      std::to_string(gap) + " consecutive missing rows before " +
                          format_ts(cur) + " (limit " + std::to_string(kMaxFillGap) + ")");
        }
        for (Ts g = 1; g <= gap; ++g) {
          SettlementRecord r = recs.back();
          r.ts = prev + g * kPeriodMinutes;
          recs.push_back(r);
          filled.push_back(true);
          ++st.filled_rows;
        }
      }
    }

    SettlementRecord r;
    r.ts = rows[i].ts;
    for (int f = 0; f < kFieldCount; ++f) {
      if (rows[i].v[f].has_value()) {
        r.v[f] = *rows[i].v[f];
        missing_run[f] = 0;
      } else {
        if (policy == FillPolicy::kReject || recs.empty()) {
          throw Error(Err::NonFiniteValue,
                      std::string("missing ") + kFieldNames[f] + " at line " +
                          std::to_string(rows[i].line));
        }
        if (++missing_run[f] > kMaxFillGap) {
          throw Error(Err::GapExceedsLimit,
                      std::string("more than ") + std::to_string(kMaxFillGap) +
                          " consecutive missing " + kFieldNames[f] + " cells");
        }
        r.v[f] = recs.back().v[f];
        ++st.filled_cells;
      }
    }
    recs.push_back(r);
    filled.push_back(false);
  }

  if (policy == FillPolicy::kForwardFill) fix_dam_for_fills(recs, filled);
  validate_dam(recs);

  st.rows = recs.size();
  if (stats) *stats = st;
  return SettlementSeries(std::move(recs));
}

}  // namespace

SettlementSeries ingest_csv_text(const std::string& text, FillPolicy policy,
                                 IngestStats* stats) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(Err::MissingColumn, "empty input");
  {
    auto cells = split_csv_line(line);
    auto want = split_csv_line(kHeader);
    if (cells.size() < want.size()) {
      throw Error(Err::MissingColumn,
                  "header has " + std::to_string(cells.size()) + " columns, want '" +
                      kHeader + "'");
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (cells[i] != want[i]) {
        throw Error(Err::MissingColumn, "missing or misplaced column '" + want[i] +
                                            "' (got '" + cells[i] + "')");
      }
    }
    if (cells.size() != want.size()) {
      throw Error(Err::MissingColumn, "unexpected extra columns in header");
    }
  }

  std::vector<RawRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 1 + kFieldCount) {
      throw Error(Err::MissingColumn, "row at line " + std::to_string(lineno) + " has " +
                                          std::to_string(cells.size()) + " cells");
    }
    RawRow r;
    r.line = lineno;
    r.ts = parse_ts(cells[0]);
    const Ts minute = r.ts % 60;
    if (minute != 0 && minute != kPeriodMinutes) {
      throw Error(Err::NonMonotonicTimestamp,
                  "timestamp " + cells[0] + " not on a half-hour boundary");
    }
    for (int f = 0; f < kFieldCount; ++f) r.v[f] = parse_cell(cells[1 + f], lineno);
    rows.push_back(r);
  }
  return ingest_rows(rows, policy, stats);
}

SettlementSeries ingest_csv(const std::string& path, FillPolicy policy,
                            IngestStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_csv_text(buf.str(), policy, stats);
}

namespace {

std::string format_double(double d) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

std::string to_csv_text(const SettlementSeries& series) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const auto& r : series.records()) {
    out += format_ts(r.ts);
    for (int f = 0; f < kFieldCount; ++f) {
      out.push_back(',');
      out += format_double(r.v[f]);
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const SettlementSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot write " + path);
  out << to_csv_text(series);
}

double synth_seasonal(const SynthParams& p, int period_of_day) {
  const double phase = 2.0 * M_PI * period_of_day / kPeriodsPerDay;
  return p.season_amp1 * std::sin(phase - 1.3) + p.season_amp2 * std::sin(2.0 * phase + 0.4);
}

SettlementSeries synthesize(int n_days, std::uint64_t seed, double spike_prob,
                            const SynthParams& params) {
  if (n_days < 2) throw Error(Err::InvalidParam, "n_days must be >= 2");
  if (!(spike_prob >= 0.0 && spike_prob <= 1.0)) {
    throw Error(Err::InvalidParam, "spike_prob must be in [0,1]");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double bound = params.stationary_bound();
  const double jump_lo = params.jump_scale * bound;
  const Ts start = parse_ts("2021-01-01T00:00");
  const int n = n_days * kPeriodsPerDay;

  std::vector<SettlementRecord> recs(n);
  double ar = 0.0;
  double dam_hour = params.mean_price;

  auto clamped_gauss = [&](double sigma) {
    double z = gauss(rng) * sigma;
    const double lim = params.innovation_clamp * sigma;
    return std::clamp(z, -lim, lim);
  };

  for (int i = 0; i < n; ++i) {
    SettlementRecord& r = recs[i];
    r.ts = start + static_cast<Ts>(i) * kPeriodMinutes;
    const int pod = period_of_day(r.ts);
    const double season = synth_seasonal(params, pod);

    ar = params.ar_phi * ar + clamped_gauss(params.ar_sigma);

    double jump = 0.0;
    const double u = unit(rng);
    const double mag = jump_lo * (1.0 + unit(rng));  // in [jump_lo, 2*jump_lo)
    const double sgn = unit(rng) < 0.5 ? -1.0 : 1.0;
    if (u < spike_prob) jump = sgn * mag;

    const double bmp = params.mean_price + season + ar + jump;
    r.v[kBmp] = bmp;

    if (pod % 2 == 0) {
      dam_hour = params.mean_price + 0.8 * season + clamped_gauss(6.0);
    }
    r.v[kDam] = dam_hour;

    const double dev = bmp - params.mean_price;
    auto noisy = [&](double base, double loading, double value, double scale) {
      return base + loading * value + clamped_gauss(params.exo_noise * scale);
    };
    r.v[kBmv] = noisy(350.0, 2.0, dev, 300.0);
    r.v[kWdiff] = noisy(40.0, 1.2, dev, 120.0);
    r.v[kInter] = noisy(-100.0, 0.8, dev, 150.0);
    r.v[kPhpn] = noisy(4200.0, 6.0, season, 800.0) + 2.0 * ar;
    r.v[kPhi] = noisy(120.0, 0.5, ar, 100.0);
    r.v[kPhfw] = noisy(1800.0, -3.0, ar, 500.0);
    r.v[kPhfd] = noisy(4000.0, 10.0, season, 600.0) + 5.0 * ar;
  }
  return SettlementSeries(std::move(recs));
}

}  // namespace bmf
