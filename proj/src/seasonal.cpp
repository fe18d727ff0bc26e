#include "eva/seasonal.hpp"

#include <algorithm>
#include <stdexcept>

namespace eva {

namespace {

void fit_slot(SeasonSlot& slot, std::vector<double> exceedances, double threshold,
              double n_years, std::span<const double> periods, const OptimizerSettings& settings) {
  if (exceedances.size() < settings.min_exceedances) {
    slot.note = std::to_string(exceedances.size()) + " exceedances, at least " +
                std::to_string(settings.min_exceedances) + " required";
    return;
  }
  std::sort(exceedances.begin(), exceedances.end());
  SeasonFit sf;
  sf.threshold = threshold;
  sf.n_exceedances = exceedances.size();
  try {
    sf.fit = fit_pot_exceedances(exceedances, threshold, n_years, settings);
  } catch (const std::exception& e) {
    slot.note = e.what();
    return;
  }
  if (sf.fit.converged)
    for (double t : periods) sf.aep.push_back(aep_with_uncertainty(sf.fit, t));
  else
    slot.note = "optimizer did not converge";
  slot.fit = std::move(sf);
}

void combine_into(SeasonalResult& r, std::span<const double> periods) {
  for (std::size_t t = 0; t < periods.size(); ++t) {
    std::array<std::optional<AepEstimate>, 4> per;
    bool any = false;
    for (int s = 0; s < 4; ++s) {
      const auto& slot = r.seasons[s];
      if (slot.fit && slot.fit->fit.converged) {
        per[s] = slot.fit->aep[t];
        any = true;
      }
    }
    r.combined.push_back(any ? std::optional(combine_seasonal(per)) : std::nullopt);
  }
}

}  // namespace

CombinedAep combine_seasonal(const std::array<std::optional<AepEstimate>, 4>& per_season) {
  std::optional<CombinedAep> best;
  for (int s = 0; s < 4; ++s) {
    if (!per_season[s]) continue;
    if (!best || per_season[s]->value > best->estimate.value)
      best = CombinedAep{*per_season[s], static_cast<Season>(s)};
  }
  if (!best) throw std::invalid_argument("combine_seasonal: no seasonal estimate present");
  return *best;
}

std::vector<SeasonalResult> seasonal_fit_approach1(const DailySeries& series,
                                                   const ThresholdSchedule& schedule,
                                                   std::span<const double> periods,
                                                   const OptimizerSettings& settings) {
  const std::size_t kept = schedule.size() > 2 ? schedule.size() - 2 : 0;
  const auto by_season = split_by_season(series);
  const auto n_years = static_cast<double>(series.n_years());

  std::vector<SeasonalResult> out;
  for (std::size_t j = 0; j < kept; ++j) {
    SeasonalResult r;
    r.approach = 1;
    r.tail_probability = schedule.tail_probabilities[j];
    r.count = schedule.exceedance_counts[j];
    r.full_year_threshold = select_exceedances(series.values, r.count).threshold;
    for (int s = 0; s < 4; ++s) {
      std::vector<double> exc;
      for (double x : by_season[s])
        if (x > r.full_year_threshold) exc.push_back(x);
      fit_slot(r.seasons[s], std::move(exc), r.full_year_threshold, n_years, periods, settings);
    }
    combine_into(r, periods);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SeasonalResult> seasonal_fit_approach2(const DailySeries& series,
                                                   const ThresholdSchedule& schedule,
                                                   std::span<const double> periods,
                                                   const OptimizerSettings& settings) {
  const auto by_season = split_by_season(series);
  const auto n_years = static_cast<double>(series.n_years());

  std::vector<SeasonalResult> out;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const std::size_t count = schedule.exceedance_counts[j];
    SeasonalResult r;
    r.approach = 2;
    r.count = count;
    r.tail_probability = schedule.tail_probabilities[j];
    r.full_year_threshold = select_exceedances(series.values, count).threshold;
    for (int s = 0; s < 4; ++s) {
      if (by_season[s].size() <= count) {
        r.seasons[s].note = "season has " + std::to_string(by_season[s].size()) +
                            " days, cannot supply " + std::to_string(count) + " exceedances";
        continue;
      }
      Exceedances exc = select_exceedances(by_season[s], count);
      fit_slot(r.seasons[s], std::move(exc.values), exc.threshold, n_years, periods, settings);
    }
    combine_into(r, periods);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace eva
