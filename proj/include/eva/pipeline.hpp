#pragma once

// Experiment configuration and the per-cell analysis driver.
//
// Config files are `key = value` lines; `#` starts a comment and list values
// are comma separated. Recognised keys:
//   input            binary store (.eva) or CSV path; empty = synthesize
//   output_dir       directory for report files
//   methods          any of gev, pot, seasonal-1, seasonal-2, empirical
//   periods          return periods T in years
//   q_max, q_min     tail-probability range of the threshold schedule
//   thresholds       number of schedule entries (1 = q_max only)
//   reference_index  schedule entry used as the stability reference
//   workers          concurrent cells
//   seed             synthesis seed
//   preset, spec     mixture for synthesis (spec file wins over preset)
//   cells, years     size of the synthesized ensemble
//   empirical_guard  empirical values need years >= guard * T
//   min_maxima, min_exceedances   fit floors

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eva/fitting.hpp"
#include "eva/report.hpp"
#include "eva/series.hpp"

namespace eva {

struct Config {
  std::string input;
  std::string output_dir = ".";
  std::vector<Method> methods{Method::Gev, Method::Pot, Method::Seasonal1, Method::Seasonal2,
                              Method::Empirical};
  std::vector<double> periods{100, 1000, 10000};
  double q_max = 1e-3;
  double q_min = 1e-5;
  int thresholds = 10;
  std::size_t reference_index = 4;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::string preset = "precip-mixture";
  std::string spec;
  std::size_t cells = 1;
  std::size_t years = 1000;
  double empirical_guard = 2.0;
  std::size_t min_maxima = 10;
  std::size_t min_exceedances = 20;

  /// Sets one key from its text form. Throws ConfigError.
  void set(const std::string& key, const std::string& value);
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  OptimizerSettings optimizer() const;
  /// Tail probability of the stability reference entry.
  double reference_tail_probability() const;
};

/// Parses a config file body; later keys override earlier ones.
Config read_config(std::istream& in, Config base = {});
Config read_config_file(const std::string& path, Config base = {});

/// Report rows for one cell, in report order. Failures become rows with
/// converged = false and a note; nothing is thrown for bad data.
std::vector<ReportRow> analyze_cell(const DailySeries& series, const Config& config);

/// Runs analyze_cell over every input cell, `workers` cells at a time, and
/// returns the rows in report order.
std::vector<ReportRow> analyze_input(const Config& config);

struct PipelineSummary {
  std::size_t cells = 0;
  std::size_t rows = 0;
  std::size_t failed_rows = 0;
};

/// analyze_input, then writes report.csv, report.json and the figure tables
/// fit_vs_empirical.csv, stability.csv, seasonal_vs_full_year.csv and
/// uncertainty_vs_shape.csv into output_dir.
PipelineSummary run_pipeline(const Config& config);

}  // namespace eva
