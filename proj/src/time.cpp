#include "cbott/time.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace cbott {

namespace {

// Howard Hinnant's days-from-civil algorithm; valid far beyond any log range.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yoe + era * 400) + (m <= 2);
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return table[m - 1];
}

bool read_digits(const char*& p, int count, int& out) {
  int v = 0;
  for (int i = 0; i < count; ++i) {
    if (p[i] < '0' || p[i] > '9') return false;
    v = v * 10 + (p[i] - '0');
  }
  p += count;
  out = v;
  return true;
}

}  // namespace

std::optional<Timestamp> parse_rfc3339(const std::string& text) {
  const char* p = text.c_str();
  int year, month, day, hour, minute, second;
  if (!read_digits(p, 4, year) || *p != '-') return std::nullopt;
  ++p;
  if (!read_digits(p, 2, month) || *p != '-') return std::nullopt;
  ++p;
  if (!read_digits(p, 2, day)) return std::nullopt;
  if (*p != 'T' && *p != 't' && *p != ' ') return std::nullopt;
  ++p;
  if (!read_digits(p, 2, hour) || *p != ':') return std::nullopt;
  ++p;
  if (!read_digits(p, 2, minute) || *p != ':') return std::nullopt;
  ++p;
  if (!read_digits(p, 2, second)) return std::nullopt;

  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month))
    return std::nullopt;
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;

  double fraction = 0.0;
  if (*p == '.') {
    ++p;
    double scale = 0.1;
    if (*p < '0' || *p > '9') return std::nullopt;
    while (*p >= '0' && *p <= '9') {
      fraction += (*p - '0') * scale;
      scale *= 0.1;
      ++p;
    }
  }

  int offset_seconds = 0;
  if (*p == 'Z' || *p == 'z') {
    ++p;
  } else if (*p == '+' || *p == '-') {
    const int sign = (*p == '-') ? -1 : 1;
    ++p;
    int oh, om;
    if (!read_digits(p, 2, oh)) return std::nullopt;
    if (*p == ':') ++p;
    if (!read_digits(p, 2, om)) return std::nullopt;
    if (oh > 23 || om > 59) return std::nullopt;
    offset_seconds = sign * (oh * 3600 + om * 60);
  } else {
    return std::nullopt;
  }
  if (*p != '\0') return std::nullopt;

  const std::int64_t days = days_from_civil(year, month, day);
  const double epoch = static_cast<double>(days) * 86400.0 + hour * 3600 +
                       minute * 60 + second - offset_seconds;
  return epoch + fraction;
}

std::string format_rfc3339(Timestamp t) {
  const double whole = std::floor(t);
  double fraction = t - whole;
  std::int64_t secs = static_cast<std::int64_t>(whole);
  // Round the fraction to microseconds; carry into the integral part.
  std::int64_t micros = static_cast<std::int64_t>(std::llround(fraction * 1e6));
  if (micros >= 1000000) {
    micros -= 1000000;
    ++secs;
  }

  std::int64_t days = secs / 86400;
  std::int64_t rem = secs % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  const int hh = static_cast<int>(rem / 3600);
  const int mm = static_cast<int>((rem % 3600) / 60);
  const int ss = static_cast<int>(rem % 60);

  char buf[64];
  if (micros == 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d, hh, mm, ss);
    return buf;
  }
  char frac[24];
  std::snprintf(frac, sizeof(frac), "%06lld", static_cast<long long>(micros));
  int len = 6;
  while (len > 1 && frac[len - 1] == '0') --len;
  frac[len] = '\0';
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%sZ", y, m, d, hh, mm, ss, frac);
  return buf;
}

int hour_of_day(Timestamp t) {
  const std::int64_t secs = static_cast<std::int64_t>(std::floor(t));
  std::int64_t rem = secs % 86400;
  if (rem < 0) rem += 86400;
  return static_cast<int>(rem / 3600);
}

}  // namespace cbott
