#pragma once

// Log-spaced threshold schedules and fits across them.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eva/aep.hpp"
#include "eva/fitting.hpp"

namespace eva {

struct ThresholdSchedule {
  std::vector<double> tail_probabilities;       // descending
  std::vector<std::size_t> exceedance_counts;   // ceil(N q), strictly decreasing
  std::size_t n_total = 0;

  std::size_t size() const { return exceedance_counts.size(); }
};

/// k tail probabilities log-spaced from q_max down to q_min inclusive, with
/// counts ceil(N q).
ThresholdSchedule build_schedule(std::size_t n_total, double q_max = 1e-3, double q_min = 1e-5,
                                 int k = 10);

/// Index of the reference entry (the count 499 of the default ten-entry
/// schedule at N = 3,856,800) in a schedule built with default spacing.
inline constexpr std::size_t kReferenceIndex = 4;

struct Exceedances {
  double threshold = 0;
  std::vector<double> values;   // all values strictly above threshold, descending
  std::size_t requested = 0;

  std::size_t count() const { return values.size(); }
  bool tied() const { return values.size() != requested; }
};

/// Threshold at the (n+1)-th largest value; exceedances are the values
/// strictly above it. Ties at the threshold change the count, which is
/// reported rather than hidden.
Exceedances select_exceedances(std::span<const double> daily, std::size_t n);

struct SweepRow {
  double tail_probability = 0;
  std::size_t requested_count = 0;
  double threshold = 0;
  FitResult fit;                 // converged=false when the fit failed
  std::vector<AepEstimate> aep;  // one per period when the fit converged
  std::string note;              // failure reason, if any
};

std::vector<SweepRow> run_sweep(std::span<const double> daily, double n_years,
                                const ThresholdSchedule& schedule,
                                std::span<const double> periods,
                                const OptimizerSettings& settings = {}, unsigned workers = 1);

struct StabilityRow {
  std::size_t count = 0;
  double tail_probability = 0;
  double xi_difference = 0;         // xi - xi_ref
  std::vector<double> aep_ratio;    // AEP / AEP_ref per period, NaN if unavailable
  bool converged = false;
};

std::vector<StabilityRow> stability_report(std::span<const SweepRow> rows,
                                           std::size_t reference_count = 499);

}  // namespace eva
