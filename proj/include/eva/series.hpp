#pragma once

// Daily series with calendar metadata. A series starts on January 1 of
// `start_year`; with `leap_days` set it follows the Gregorian calendar
// (Feb 29 present in leap years), otherwise every year has 365 days.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eva {

enum class Season { DJF = 0, MAM = 1, JJA = 2, SON = 3 };

inline constexpr std::array<Season, 4> kSeasons{Season::DJF, Season::MAM, Season::JJA,
                                                  Season::SON};

std::string_view season_name(Season s);
Season parse_season(std::string_view name);

/// Season of a day in the 365-day calendar (1 = Jan 1, 365 = Dec 31).
Season assign_season(int day_of_year);

/// Month (1..12) of a day in the 365-day calendar.
int month_of_day(int day_of_year);

constexpr bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

constexpr int days_in_year(int year, bool leap_days) {
  return (leap_days && is_leap_year(year)) ? 366 : 365;
}

/// Day of year of Feb 29 in a leap year.
inline constexpr int kLeapDayIndex = 60;

struct DailySeries {
  std::string id;
  int start_year = 1;
  bool leap_days = false;
  std::vector<double> values;
  std::string variable;
  std::string units;

  /// Calendar years touched by the series, counting a trailing partial year.
  std::size_t n_years() const;
  /// True when the series ends on December 31.
  bool whole_years() const;
};

/// Throws std::invalid_argument for non-finite values, or negative values of
/// a precipitation variable.
void validate(const DailySeries& s);

bool is_precipitation(std::string_view variable);

/// Calls f(index, year, day_of_year) for every day, where day_of_year is in
/// the 365-day calendar and is 0 for Feb 29.
template <typename F>
void for_each_day(const DailySeries& s, F&& f) {
  std::size_t i = 0;
  const std::size_t n = s.values.size();
  for (int year = s.start_year; i < n; ++year) {
    const bool leap = s.leap_days && is_leap_year(year);
    for (int d = 1; d <= (leap ? 366 : 365) && i < n; ++d, ++i) {
      if (!leap || d < kLeapDayIndex)
        f(i, year, d);
      else if (d == kLeapDayIndex)
        f(i, year, 0);
      else
        f(i, year, d - 1);
    }
  }
}

/// Values of each season, in time order. Feb 29 belongs to DJF.
std::array<std::vector<double>, 4> split_by_season(const DailySeries& s);

}  // namespace eva
