#pragma once

// Report rows and their CSV / JSON encodings, plus the per-figure scatter
// tables derived from them.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace eva {

enum class Method { Gev, Pot, Seasonal1, Seasonal2, Empirical };

std::string method_name(Method m);

struct ReportRow {
  std::string cell;
  Method method = Method::Pot;
  std::optional<double> tail_probability;   // disengaged for annual-maximum methods
  std::size_t n_used = 0;
  double mu = kMissing;
  double sigma = kMissing;
  double xi = kMissing;
  double se_xi = kMissing;
  double period = 0;
  double aep = kMissing;
  double aep_se = kMissing;
  double relative_uncertainty = kMissing;
  bool converged = false;
  std::string season;   // seasonal methods: season supplying the combined value
  std::string note;

  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
};

/// Orders rows by (cell order of first appearance, method, tail probability
/// with "annual" first then descending, period).
void sort_rows(std::vector<ReportRow>& rows, const std::vector<std::string>& cell_order);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
void write_report_json(std::ostream& out, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(std::istream& in);

/// Figure-analogue tables, each a pure function of the rows.
void write_fit_vs_empirical(std::ostream& out, const std::vector<ReportRow>& rows);
void write_stability(std::ostream& out, const std::vector<ReportRow>& rows,
                     double reference_tail_probability);
void write_seasonal_vs_full_year(std::ostream& out, const std::vector<ReportRow>& rows);
void write_uncertainty_vs_shape(std::ostream& out, const std::vector<ReportRow>& rows,
                                double reference_tail_probability);

/// Shortest round-trippable decimal form used in every report file; empty
/// for NaN.
std::string format_number(double x);

}  // namespace eva
