#pragma once

// Season-stratified threshold-exceedance fits and their combination into an
// overall AEP value (the largest seasonal value).

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eva/aep.hpp"
#include "eva/fitting.hpp"
#include "eva/series.hpp"
#include "eva/threshold_sweep.hpp"

namespace eva {

struct SeasonFit {
  double threshold = 0;
  std::size_t n_exceedances = 0;
  FitResult fit;
  std::vector<AepEstimate> aep;   // per period; empty unless the fit converged
};

struct SeasonSlot {
  std::optional<SeasonFit> fit;   // absent when the season cannot be fitted
  std::string note;               // why it is absent or unconverged
};

struct CombinedAep {
  AepEstimate estimate;
  Season season = Season::DJF;    // season supplying the value and the se
};

struct SeasonalResult {
  int approach = 1;
  double tail_probability = 0;
  std::size_t count = 0;                  // full-year exceedance count
  double full_year_threshold = 0;
  std::array<SeasonSlot, 4> seasons;
  std::vector<std::optional<CombinedAep>> combined;   // per period
};

/// Largest value among the present estimates; ties go to the earlier season
/// in DJF, MAM, JJA, SON order. Throws when no estimate is present.
CombinedAep combine_seasonal(const std::array<std::optional<AepEstimate>, 4>& per_season);

/// Approach 1: full-year thresholds applied within each season. The two
/// highest thresholds of the schedule are dropped.
std::vector<SeasonalResult> seasonal_fit_approach1(const DailySeries& series,
                                                   const ThresholdSchedule& schedule,
                                                   std::span<const double> periods,
                                                   const OptimizerSettings& settings = {});

/// Approach 2: each season contributes the full-year exceedance count of
/// every schedule entry.
std::vector<SeasonalResult> seasonal_fit_approach2(const DailySeries& series,
                                                   const ThresholdSchedule& schedule,
                                                   std::span<const double> periods,
                                                   const OptimizerSettings& settings = {});

}  // namespace eva
