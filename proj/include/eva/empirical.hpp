#pragma once

// Model-free AEP values: annual maxima and their empirical quantiles.

#include <cstddef>
#include <span>
#include <vector>

#include "eva/series.hpp"

namespace eva {

struct AnnualMaxima {
  std::vector<double> values;   // one per calendar year
  int start_year = 1;
  bool leap_days_removed = false;

  std::size_t n_years() const { return values.size(); }
};

/// Per-year maxima over the 365 non-leap days. Throws when the final year is
/// incomplete.
AnnualMaxima annual_maxima(const DailySeries& series);

/// The (1 - 1/T) quantile of the maxima, interpolating linearly between
/// plotting positions i/(n+1). Requires n >= guard_factor * T.
double empirical_aep(std::span<const double> maxima, double period, double guard_factor = 2.0);

inline double empirical_aep(const AnnualMaxima& maxima, double period, double guard_factor = 2.0) {
  return empirical_aep(maxima.values, period, guard_factor);
}

}  // namespace eva
