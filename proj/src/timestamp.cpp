#include "faultae/timestamp.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "faultae/errors.hpp"

namespace faultae {
namespace {

bool read_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, out);
  return ec == std::errc{};
}

}  // namespace

Minute parse_minute(std::string_view text) {
  // YYYY-MM-DD HH:MM
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  const bool shape_ok = text.size() == 16 && text[4] == '-' && text[7] == '-' &&
                        (text[10] == ' ' || text[10] == 'T') && text[13] == ':';
  if (!shape_ok || !read_digits(text, 0, 4, y) || !read_digits(text, 5, 2, mo) ||
      !read_digits(text, 8, 2, d) || !read_digits(text, 11, 2, h) ||
      !read_digits(text, 14, 2, mi)) {
    throw ParseError("malformed timestamp '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59) {
    throw ParseError("invalid calendar timestamp '" + std::string(text) + "'");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return Minute{static_cast<std::int64_t>(days) * 1440 + h * 60 + mi};
}

std::string format_minute(Minute m) {
  using namespace std::chrono;
  std::int64_t days = m.value / 1440;
  std::int64_t rem = m.value % 1440;
  if (rem < 0) {
    rem += 1440;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 60), static_cast<int>(rem % 60));
  return buf;
}

}  // namespace faultae
