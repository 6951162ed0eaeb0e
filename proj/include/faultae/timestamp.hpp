#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace faultae {

/// Minute-resolution instant, counted in whole minutes since 1970-01-01 00:00.
/// Local wall-clock time; no time-zone arithmetic is performed.
struct Minute {
  std::int64_t value = 0;

  friend constexpr auto operator<=>(Minute, Minute) = default;
  friend constexpr Minute operator+(Minute m, std::int64_t minutes) { return {m.value + minutes}; }
  friend constexpr std::int64_t operator-(Minute a, Minute b) { return a.value - b.value; }
};

/// Parses "YYYY-MM-DD HH:MM". A "T" separator is accepted as well.
/// Throws ParseError on anything else, including invalid calendar dates.
Minute parse_minute(std::string_view text);

/// Formats as "YYYY-MM-DD HH:MM".
std::string format_minute(Minute m);

}  // namespace faultae
