#pragma once

// Synthetic daily ensembles drawn from seasonal storm-type mixtures, and
// Monte Carlo ground truth for their annual-maximum quantiles.
//
// On each day of season s exactly one of the season's storm types occurs,
// type k with probability p_k, or none with probability 1 - sum p_k. The
// day's value is baseline(day) plus the storm magnitude, or the baseline
// alone on a quiet day.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eva/series.hpp"

namespace eva {

struct GammaMagnitude {
  double shape = 1;
  double scale = 1;
};

struct GpdMagnitude {
  double threshold = 0;
  double scale = 1;
  double shape = 0;
};

struct GevMagnitude {
  double location = 0;
  double scale = 1;
  double shape = 0;
};

using Magnitude = std::variant<GammaMagnitude, GpdMagnitude, GevMagnitude>;

struct StormType {
  std::string name;
  double probability = 0;   // per day within the season
  Magnitude magnitude;
};

/// Seasonal cycle mean + amplitude * cos(2 pi (day - peak_day) / 365).
struct Baseline {
  double mean = 0;
  double amplitude = 0;
  int peak_day = 200;

  double at(int day_of_year) const;
  bool constant() const { return amplitude == 0; }
};

struct MixtureSpec {
  std::string variable = "precip";
  std::string units = "mm/day";
  std::array<std::vector<StormType>, 4> seasons;   // indexed by Season
  Baseline baseline;
  std::size_t cells = 1;
  /// Log-scale standard deviation of a per-cell multiplier on every scale
  /// parameter.
  double jitter = 0;

  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;

  /// Adds `type` to each listed season.
  MixtureSpec& add(const StormType& type, std::initializer_list<Season> in_seasons);
};

struct TruthRecord {
  double period = 0;
  double value = 0;
  double mc_standard_error = 0;
  std::size_t mc_years = 0;
};

/// The spec with the per-cell scale jitter of `cell` applied.
MixtureSpec cell_spec(const MixtureSpec& spec, std::uint32_t cell, std::uint64_t seed);

/// n_years of 365-day years. Day d of the series depends only on
/// (spec, seed, cell, d), so output is identical for any worker count.
DailySeries generate_cell(const MixtureSpec& spec, std::size_t n_years, std::uint64_t seed,
                          std::uint32_t cell = 0, unsigned workers = 1);

/// 1-in-T value from mc_years simulated annual maxima, with a standard error
/// from ten equal batches.
TruthRecord true_quantile(const MixtureSpec& spec, double period, std::size_t mc_years,
                          std::uint64_t seed, std::uint32_t cell = 0, unsigned workers = 1);

/// Simulated annual maxima (no daily storage); year y depends only on
/// (spec, seed, cell, y).
std::vector<double> simulate_annual_maxima(const MixtureSpec& spec, std::size_t first_year,
                                           std::size_t n_years, std::uint64_t seed,
                                           std::uint32_t cell = 0);

/// "precip-mixture", "precip-homogeneous", "temperature-bounded" or
/// "precip-jja-extremes".
MixtureSpec preset(std::string_view name);
std::vector<std::string> preset_names();

/// Largest value any cell of the spec can produce (before jitter), or +inf.
double upper_bound(const MixtureSpec& spec);

MixtureSpec read_mixture_spec(std::istream& in);
void write_mixture_spec(std::ostream& out, const MixtureSpec& spec);
MixtureSpec read_mixture_spec_file(const std::string& path);
void write_mixture_spec_file(const std::string& path, const MixtureSpec& spec);

}  // namespace eva
