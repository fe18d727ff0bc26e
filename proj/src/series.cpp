#include "eva/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eva {

namespace {
constexpr std::array<int, 12> kMonthEnd{31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334, 365};
}

std::string_view season_name(Season s) {
  switch (s) {
    case Season::DJF: return "DJF";
    case Season::MAM: return "MAM";
    case Season::JJA: return "JJA";
    case Season::SON: return "SON";
  }
  return "?";
}

Season parse_season(std::string_view name) {
  for (Season s : kSeasons)
    if (season_name(s) == name) return s;
  throw std::invalid_argument("unknown season '" + std::string(name) + "'");
}

int month_of_day(int day_of_year) {
  if (day_of_year < 1 || day_of_year > 365)
    throw std::out_of_range("day of year " + std::to_string(day_of_year) +
                            " outside 1..365");
  int m = 0;
  while (day_of_year > kMonthEnd[m]) ++m;
  return m + 1;
}

Season assign_season(int day_of_year) {
  const int month = month_of_day(day_of_year);
  switch (month) {
    case 12:
    case 1:
    case 2: return Season::DJF;
    case 3:
    case 4:
    case 5: return Season::MAM;
    case 6:
    case 7:
    case 8: return Season::JJA;
    default: return Season::SON;
  }
}

std::size_t DailySeries::n_years() const {
  std::size_t remaining = values.size();
  std::size_t years = 0;
  for (int y = start_year; remaining > 0; ++y, ++years) {
    const auto len = static_cast<std::size_t>(days_in_year(y, leap_days));
    remaining -= std::min(remaining, len);
  }
  return years;
}

bool DailySeries::whole_years() const {
  std::size_t total = 0;
  for (int y = start_year; total < values.size(); ++y)
    total += static_cast<std::size_t>(days_in_year(y, leap_days));
  return total == values.size();
}

bool is_precipitation(std::string_view variable) {
  return variable == "precip" || variable == "pr" || variable == "precipitation";
}

void validate(const DailySeries& s) {
  const bool nonneg = is_precipitation(s.variable);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double v = s.values[i];
    if (!std::isfinite(v))
      throw std::invalid_argument("series '" + s.id + "': non-finite value at day " +
                                  std::to_string(i));
    if (nonneg && v < 0)
      throw std::invalid_argument("series '" + s.id + "': negative precipitation at day " +
                                  std::to_string(i));
  }
}

std::array<std::vector<double>, 4> split_by_season(const DailySeries& s) {
  std::array<std::vector<double>, 4> out;
  for (auto& v : out) v.reserve(s.values.size() / 4 + 92);
  for_each_day(s, [&](std::size_t i, int, int doy) {
    const Season season = doy == 0 ? Season::DJF : assign_season(doy);
    out[static_cast<int>(season)].push_back(s.values[i]);
  });
  return out;
}

}  // namespace eva
