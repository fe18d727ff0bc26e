#include "eva/threshold_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "eva/parallel.hpp"

namespace eva {

ThresholdSchedule build_schedule(std::size_t n_total, double q_max, double q_min, int k) {
  if (!(q_max > 0 && q_max < 1 && q_min > 0 && q_min < 1))
    throw std::invalid_argument("build_schedule: tail probabilities must lie in (0, 1)");
  if (k < 1) throw std::invalid_argument("build_schedule: at least one threshold required");
  if (k > 1 && !(q_min < q_max))
    throw std::invalid_argument("build_schedule: q_min must be below q_max");

  ThresholdSchedule s;
  s.n_total = n_total;
  const double lo = std::log10(q_max);
  const double hi = std::log10(q_min);
  for (int j = 0; j < k; ++j) {
    const double q = j == 0       ? q_max
                     : j == k - 1 ? q_min
                                  : std::pow(10.0, lo + (hi - lo) * j / (k - 1));
    // The relative nudge keeps products that are integers up to rounding
    // error (e.g. 10^6 * 10^-3) from being bumped to the next count.
    const double expected = static_cast<double>(n_total) * q;
    const auto count = static_cast<std::size_t>(std::ceil(expected * (1.0 - 1e-12)));
    if (count < 1) throw std::invalid_argument("build_schedule: zero exceedances at q = " +
                                               std::to_string(q));
    if (!s.exceedance_counts.empty() && count >= s.exceedance_counts.back())
      throw std::invalid_argument("build_schedule: counts not strictly decreasing for N = " +
                                  std::to_string(n_total));
    s.tail_probabilities.push_back(q);
    s.exceedance_counts.push_back(count);
  }
  return s;
}

namespace {

// `top` holds at least n+1 values sorted descending.
Exceedances from_sorted(std::span<const double> top, std::size_t n) {
  Exceedances e;
  e.requested = n;
  e.threshold = top[n];
  auto end = std::find_if(top.begin(), top.end(), [&](double x) { return !(x > e.threshold); });
  e.values.assign(top.begin(), end);
  return e;
}

// The largest `k` values, descending.
std::vector<double> top_values(std::span<const double> daily, std::size_t k) {
  std::vector<double> v(daily.begin(), daily.end());
  if (k < v.size()) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end(),
                     std::greater<>());
    v.resize(k);
  }
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

}  // namespace

Exceedances select_exceedances(std::span<const double> daily, std::size_t n) {
  if (n >= daily.size())
    throw std::invalid_argument("select_exceedances: " + std::to_string(n) +
                                " exceedances requested from " + std::to_string(daily.size()) +
                                " values");
  const std::vector<double> top = top_values(daily, n + 1);
  return from_sorted(top, n);
}

std::vector<SweepRow> run_sweep(std::span<const double> daily, double n_years,
                                const ThresholdSchedule& schedule,
                                std::span<const double> periods,
                                const OptimizerSettings& settings, unsigned workers) {
  if (schedule.size() == 0) return {};
  const std::size_t max_count =
      *std::max_element(schedule.exceedance_counts.begin(), schedule.exceedance_counts.end());
  if (max_count >= daily.size())
    throw std::invalid_argument("run_sweep: schedule needs " + std::to_string(max_count + 1) +
                                " values, series has " + std::to_string(daily.size()));
  const std::vector<double> top = top_values(daily, max_count + 1);

  std::vector<SweepRow> rows(schedule.size());
  parallel_for(schedule.size(), workers, [&](std::size_t j) {
    SweepRow& row = rows[j];
    row.tail_probability = schedule.tail_probabilities[j];
    row.requested_count = schedule.exceedance_counts[j];
    const Exceedances exc = from_sorted(top, row.requested_count);
    row.threshold = exc.threshold;
    row.fit.n_used = exc.count();
    row.fit.n_years = n_years;
    row.fit.params = {std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN()};
    try {
      std::vector<double> asc(exc.values.rbegin(), exc.values.rend());
      row.fit = fit_pot_exceedances(asc, exc.threshold, n_years, settings);
      if (!row.fit.converged) row.note = "optimizer did not converge";
      if (exc.tied())
        row.note += (row.note.empty() ? "" : "; ") + std::string("ties at threshold: ") +
                    std::to_string(exc.count()) + " exceedances";
      if (row.fit.converged)
        for (double t : periods) row.aep.push_back(aep_with_uncertainty(row.fit, t));
    } catch (const std::exception& e) {
      row.fit.converged = false;
      row.note = e.what();
    }
  });
  return rows;
}

std::vector<StabilityRow> stability_report(std::span<const SweepRow> rows,
                                           std::size_t reference_count) {
  auto ref = std::find_if(rows.begin(), rows.end(), [&](const SweepRow& r) {
    return r.requested_count == reference_count;
  });
  if (ref == rows.end())
    throw std::invalid_argument("stability_report: no row with reference count " +
                                std::to_string(reference_count));
  if (!ref->fit.converged)
    throw std::invalid_argument("stability_report: reference fit did not converge");

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  std::vector<StabilityRow> out;
  for (const SweepRow& r : rows) {
    StabilityRow s;
    s.count = r.requested_count;
    s.tail_probability = r.tail_probability;
    s.converged = r.fit.converged;
    s.xi_difference = r.fit.converged ? r.fit.params.xi - ref->fit.params.xi : kNaN;
    for (std::size_t t = 0; t < ref->aep.size(); ++t) {
      const bool ok = r.fit.converged && t < r.aep.size();
      s.aep_ratio.push_back(ok ? r.aep[t].value / ref->aep[t].value : kNaN);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace eva
