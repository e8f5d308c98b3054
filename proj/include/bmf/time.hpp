#pragma once

#include <cstdint>
#include <string>

namespace bmf {

// Timestamps are UTC minutes since the Unix epoch. Settlement periods are
// 30 minutes apart, so consecutive records differ by kPeriodMinutes.
using Ts = std::int64_t;

inline constexpr Ts kPeriodMinutes = 30;
inline constexpr int kPeriodsPerDay = 48;

// Parses "YYYY-MM-DDTHH:MM"; throws Error(InvalidParam) on malformed input.
Ts parse_ts(const std::string& s);

std::string format_ts(Ts t);

inline int hour_of_day(Ts t) {
  Ts m = t % (24 * 60);
  if (m < 0) m += 24 * 60;
  return static_cast<int>(m / 60);
}

inline int period_of_day(Ts t) {
  Ts m = t % (24 * 60);
  if (m < 0) m += 24 * 60;
  return static_cast<int>(m / kPeriodMinutes);
}

}  // namespace bmf
