#include "eva/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace eva {

AnnualMaxima annual_maxima(const DailySeries& series) {
  if (!series.whole_years())
    throw std::invalid_argument("annual_maxima: series '" + series.id + "' ends in partial year " +
                                std::to_string(series.start_year +
                                               static_cast<int>(series.n_years()) - 1));
  AnnualMaxima out;
  out.start_year = series.start_year;
  out.leap_days_removed = series.leap_days;
  out.values.assign(series.n_years(), -std::numeric_limits<double>::infinity());
  for_each_day(series, [&](std::size_t i, int year, int doy) {
    if (doy == 0) return;
    double& m = out.values[static_cast<std::size_t>(year - series.start_year)];
    m = std::max(m, series.values[i]);
  });
  return out;
}

double empirical_aep(std::span<const double> maxima, double period, double guard_factor) {
  if (!(period > 1)) throw std::domain_error("empirical_aep: period must exceed 1");
  const double n = static_cast<double>(maxima.size());
  if (n < guard_factor * period || maxima.size() < 2)
    throw std::invalid_argument("empirical_aep: 1-in-" + std::to_string(period) +
                                " needs at least " +
                                std::to_string(static_cast<long long>(
                                    std::ceil(std::max(guard_factor * period, 2.0)))) +
                                " years, have " + std::to_string(maxima.size()));
  std::vector<double> sorted(maxima.begin(), maxima.end());
  std::sort(sorted.begin(), sorted.end());
  // Position of probability p among i/(n+1), i = 1..n (1-based).
  const double p = 1.0 - 1.0 / period;
  const double pos = p * (n + 1.0);
  if (pos <= 1.0) return sorted.front();
  if (pos >= n) return sorted.back();
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

}  // namespace eva
