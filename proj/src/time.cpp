#include "bmf/time.hpp"

#include <cstdio>

#include "bmf/errors.hpp"

namespace bmf {

namespace {

// Howard Hinnant's days-from-civil algorithm.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

}  // namespace

Ts parse_ts(const std::string& s) {
  int y, mo, d, h, mi;
  char t;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d", &y, &mo, &d, &t, &h, &mi) != 6 ||
      (t != 'T' && t != ' ') || s.size() != 16) {
    throw Error(Err::InvalidParam, "bad timestamp '" + s + "' (want YYYY-MM-DDTHH:MM)");
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59) {
    throw Error(Err::InvalidParam, "timestamp field out of range in '" + s + "'");
  }
  return days_from_civil(y, mo, d) * 24 * 60 + h * 60 + mi;
}

std::string format_ts(Ts t) {
  std::int64_t days = t / (24 * 60);
  std::int64_t rem = t % (24 * 60);
  if (rem < 0) {
    rem += 24 * 60;
    --days;
  }
  int y, mo, d;
  civil_from_days(days, y, mo, d);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d", y, mo, d,
                static_cast<int>(rem / 60), static_cast<int>(rem % 60));
  return buf;
}

}  // namespace bmf
