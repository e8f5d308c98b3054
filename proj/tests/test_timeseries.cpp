#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>

#include "bmf/errors.hpp"
#include "bmf/timeseries.hpp"
#include "doctest.h"

using namespace bmf;

namespace {

std::string row(const std::string& ts, double base) {
  std::string r = ts;
  for (int c = 0; c < kFieldCount; ++c) r += ',' + std::to_string(base + c);
  return r + '\n';
}

const std::string kHeader = "ts,bmp,bmv,wdiff,inter,dam,phpn,phi,phfw,phfd\n";

}  // namespace

TEST_CASE("timestamp parse/format round trip") {
  CHECK(format_ts(parse_ts("2021-01-01T00:00")) == "2021-01-01T00:00");
  CHECK(format_ts(parse_ts("2023-11-30T23:30")) == "2023-11-30T23:30");
  CHECK(parse_ts("2021-01-01T00:30") - parse_ts("2021-01-01T00:00") == 30);
  CHECK(hour_of_day(parse_ts("2021-03-05T17:30")) == 17);
  CHECK(period_of_day(parse_ts("2021-03-05T17:30")) == 35);
  CHECK_THROWS_AS((void)parse_ts("2021-13-01T00:00"), Error);
  CHECK_THROWS_AS((void)parse_ts("garbage"), Error);
}

TEST_CASE("ingest accepts a well-formed 3-row file") {
  IngestStats stats;
  SettlementSeries s = ingest_csv_text(kHeader + row("2021-01-01T00:00", 1.0) +
                                           row("2021-01-01T00:30", 1.0) +
                                           row("2021-01-01T01:00", 3.0),
                                       FillPolicy::kReject, &stats);
  CHECK(s.size() == 3);
  CHECK(stats.rows == 3);
  CHECK(stats.filled_cells == 0);
  CHECK(s[0].bmp() == 1.0);
  CHECK(s.index_of(parse_ts("2021-01-01T00:30")) == 1);
  CHECK_FALSE(s.index_of(parse_ts("2021-01-01T02:00")).has_value());
}

TEST_CASE("missing cell is forward filled under ffill and rejected otherwise") {
  std::string text = kHeader + row("2021-01-01T00:00", 1.0);
  // bmv (second value) missing in row two.
  text += "2021-01-01T00:30,5.0,,3.0,4.0,5.0,6.0,7.0,8.0,9.0\n";
  IngestStats stats;
  SettlementSeries s = ingest_csv_text(text, FillPolicy::kForwardFill, &stats);
  CHECK(s[1].v[kBmv] == s[0].v[kBmv]);
  CHECK(stats.filled_cells == 1);
  CHECK_THROWS_AS((void)ingest_csv_text(text, FillPolicy::kReject), Error);
}

TEST_CASE("timestamp gap is an error under reject") {
  const std::string text =
      kHeader + row("2021-01-01T00:00", 1.0) + row("2021-01-01T01:00", 1.0);
  try {
    (void)ingest_csv_text(text, FillPolicy::kReject);
    FAIL("expected gap error");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::NonMonotonicTimestamp);
  }
}

TEST_CASE("gaps beyond 4 missing rows reject even under ffill") {
  // 00:00 then 03:00 -> 5 missing rows.
  const std::string text =
      kHeader + row("2021-01-01T00:00", 1.0) + row("2021-01-01T03:00", 1.0);
  try {
    (void)ingest_csv_text(text, FillPolicy::kForwardFill);
    FAIL("expected gap error");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::GapExceedsLimit);
  }
  // A 4-row gap fills.
  const std::string ok =
      kHeader + row("2021-01-01T00:00", 1.0) + row("2021-01-01T02:30", 1.0);
  IngestStats stats;
  SettlementSeries s = ingest_csv_text(ok, FillPolicy::kForwardFill, &stats);
  CHECK(s.size() == 6);
  CHECK(stats.filled_rows == 4);
}

TEST_CASE("missing column and out-of-order rows are errors") {
  try {
    (void)ingest_csv_text("ts,bmp,bmv,wdiff,inter,dam,phpn,phi,phfw\n",
                          FillPolicy::kReject);
    FAIL("expected header error");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::MissingColumn);
  }
  const std::string text =
      kHeader + row("2021-01-01T00:30", 1.0) + row("2021-01-01T00:00", 1.0);
  CHECK_THROWS_AS((void)ingest_csv_text(text, FillPolicy::kReject), Error);
}

TEST_CASE("non-finite values and non-constant dam reject") {
  std::string text = kHeader + "2021-01-01T00:00,1,2,3,4,5,6,7,8,nan\n";
  try {
    (void)ingest_csv_text(text, FillPolicy::kReject);
    FAIL("expected non-finite error");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::NonFiniteValue);
  }
  std::string bad_dam = kHeader;
  bad_dam += "2021-01-01T00:00,1,2,3,4,10,6,7,8,9\n";
  bad_dam += "2021-01-01T00:30,1,2,3,4,11,6,7,8,9\n";
  try {
    (void)ingest_csv_text(bad_dam, FillPolicy::kReject);
    FAIL("expected dam error");
  } catch (const Error& e) {
    CHECK(e.kind() == Err::NonConstantDam);
  }
}

TEST_CASE("synthesize basics: size, determinism, validity, round trip") {
  SettlementSeries s = synthesize(2, 7, 0.0);
  CHECK(s.size() == 96);
  CHECK(s.front_ts() == parse_ts("2021-01-01T00:00"));

  SettlementSeries again = synthesize(2, 7, 0.0);
  CHECK(to_csv_text(s) == to_csv_text(again));

  // Output must pass ingest-level validation and round-trip exactly.
  SettlementSeries back = ingest_csv_text(to_csv_text(s), FillPolicy::kReject);
  CHECK(back == s);

  CHECK_THROWS_AS((void)synthesize(1, 7, 0.0), Error);
  CHECK_THROWS_AS((void)synthesize(2, 7, 1.5), Error);
}

TEST_CASE("spike_prob=0 keeps bmp inside the stationary band") {
  const SynthParams p;
  SettlementSeries s = synthesize(30, 11, 0.0);
  const double bound = p.stationary_bound();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double dev =
        s[i].bmp() - p.mean_price - synth_seasonal(p, period_of_day(s[i].ts));
    CHECK(std::abs(dev) <= bound + 1e-9);
  }
}

TEST_CASE("spike_prob=1 puts a jump in every period") {
  const SynthParams p;
  SettlementSeries s = synthesize(2, 3, 1.0);
  // A jump always pushes |bmp - mean - seasonal| beyond the stationary band:
  // the smallest jump is jump_scale * bound and the AR part is within bound.
  const double bound = p.stationary_bound();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double dev =
        s[i].bmp() - p.mean_price - synth_seasonal(p, period_of_day(s[i].ts));
    CHECK(std::abs(dev) > bound);
  }
}

TEST_CASE("spike counts are seed-stable and roughly binomial") {
  const SynthParams p;
  const double bound = p.stationary_bound();
  SettlementSeries s = synthesize(120, 5, 0.02);
  int jumps = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double dev =
        s[i].bmp() - p.mean_price - synth_seasonal(p, period_of_day(s[i].ts));
    if (std::abs(dev) > bound) ++jumps;
  }
  const double expected = 0.02 * double(s.size());
  const double sd = std::sqrt(0.02 * 0.98 * double(s.size()));
  CHECK(double(jumps) > expected - 4 * sd);
  CHECK(double(jumps) < expected + 4 * sd);
}
