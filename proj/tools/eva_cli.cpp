// eva: extreme value analysis of daily ensembles.
//
//   eva synth     --out cells.eva [--truth-out truth.csv] ...
//   eva fit-gev   --input cells.eva [--out rows.csv]
//   eva fit-pot   --input cells.eva --q 1e-4
//   eva sweep     --input cells.eva [--stability stability.csv]
//   eva seasonal  --input cells.eva [--approach 1|2]
//   eva empirical --input cells.eva
//   eva report    --config experiment.cfg
//
// Every subcommand accepts --config and the config keys as flags (with '-'
// for '_'); flags override the file. Exit status: 0 ok, 1 config error,
// 2 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "eva/errors.hpp"
#include "eva/io.hpp"
#include "eva/parallel.hpp"
#include "eva/pipeline.hpp"
#include "eva/synthetic.hpp"

namespace {

constexpr const char* kConfigKeys[] = {
    "input", "output_dir", "methods", "periods", "q_max", "q_min", "thresholds",
    "reference_index", "workers", "seed", "preset", "spec", "cells", "years",
    "empirical_guard", "min_maxima", "min_exceedances"};

struct Common {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "Key-value config file");
  for (const char* key : kConfigKeys) {
    std::string flag = key;
    for (char& c : flag)
      if (c == '_') c = '-';
    cmd->add_option("--" + flag, common.overrides[key], std::string("Config key ") + key);
  }
}

eva::Config load_config(const Common& common) {
  eva::Config c;
  c.workers = eva::default_workers();
  if (!common.config_path.empty()) c = eva::read_config_file(common.config_path, c);
  for (const auto& [key, value] : common.overrides)
    if (!value.empty()) c.set(key, value);
  c.validate();
  return c;
}

void emit_rows(const std::string& out_path, const std::vector<eva::ReportRow>& rows) {
  if (out_path.empty() || out_path == "-") {
    eva::write_report_csv(std::cout, rows);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw eva::IoError("cannot open " + out_path + " for writing");
  eva::write_report_csv(out, rows);
  if (!out.flush()) throw eva::IoError("write failed for " + out_path);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw eva::IoError("cannot open " + path + " for writing");
  return out;
}

eva::MixtureSpec mixture_of(const eva::Config& c) {
  if (!c.spec.empty()) return eva::read_mixture_spec_file(c.spec);
  try {
    return eva::preset(c.preset);
  } catch (const std::exception& e) {
    throw eva::ConfigError(e.what());
  }
}

int run_synth(const eva::Config& c, const std::string& out_path, const std::string& truth_path,
              const std::string& spec_out, std::size_t mc_years) {
  const eva::MixtureSpec spec = mixture_of(c);
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw eva::ConfigError(std::string("mixture spec: ") + e.what());
  }
  if (!spec_out.empty()) eva::write_mixture_spec_file(spec_out, spec);

  const bool csv = out_path.size() >= 4 && out_path.substr(out_path.size() - 4) == ".csv";
  if (csv) {
    std::vector<eva::DailySeries> cells;
    for (std::size_t i = 0; i < c.cells; ++i)
      cells.push_back(eva::generate_cell(spec, c.years, c.seed, static_cast<std::uint32_t>(i),
                                         c.workers));
    auto out = open_output(out_path);
    eva::write_csv(out, cells);
    if (!out.flush()) throw eva::IoError("write failed for " + out_path);
  } else {
    eva::StoreWriter writer(out_path, static_cast<std::uint32_t>(c.cells));
    for (std::size_t i = 0; i < c.cells; ++i)
      writer.write(eva::generate_cell(spec, c.years, c.seed, static_cast<std::uint32_t>(i),
                                      c.workers));
    writer.close();
  }

  if (!truth_path.empty()) {
    auto out = open_output(truth_path);
    out << "cell,period,value,mc_standard_error,mc_years\n";
    for (std::size_t i = 0; i < c.cells; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "cell-%04zu", i);
      for (double t : c.periods) {
        const eva::TruthRecord tr = eva::true_quantile(
            spec, t, mc_years, c.seed, static_cast<std::uint32_t>(i), c.workers);
        out << id << ',' << eva::format_number(t) << ',' << eva::format_number(tr.value) << ','
            << eva::format_number(tr.mc_standard_error) << ',' << tr.mc_years << "\n";
      }
    }
    if (!out.flush()) throw eva::IoError("write failed for " + truth_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme value analysis of daily ensembles"};
  app.require_subcommand(1);

  Common common;
  std::string out_path;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic storm-mixture ensemble");
  std::string truth_path, spec_out;
  std::size_t mc_years = 1'000'000;
  add_common(synth, common);
  synth->add_option("--out", out_path, "Output store (.eva) or CSV (.csv)")->required();
  synth->add_option("--truth-out", truth_path, "Monte Carlo 1-in-T values per cell");
  synth->add_option("--mc-years", mc_years, "Simulated years for --truth-out");
  synth->add_option("--write-spec", spec_out, "Write the mixture as a spec file");

  auto* fit_gev = app.add_subcommand("fit-gev", "GEV fits to annual maxima");
  auto* fit_pot = app.add_subcommand("fit-pot", "Point-process fit at one tail probability");
  auto* sweep = app.add_subcommand("sweep", "Point-process fits across the threshold schedule");
  auto* seasonal = app.add_subcommand("seasonal", "Season-stratified threshold fits");
  auto* empirical = app.add_subcommand("empirical", "Empirical 1-in-T values");
  auto* report = app.add_subcommand("report", "Full pipeline: report and figure tables");

  double q = 0;
  int approach = 0;
  std::string stability_path;
  for (auto* cmd : {fit_gev, fit_pot, sweep, seasonal, empirical}) {
    add_common(cmd, common);
    cmd->add_option("--out", out_path, "Report rows CSV (default stdout)");
  }
  add_common(report, common);
  fit_pot->add_option("--q", q, "Tail probability (default: schedule reference)");
  sweep->add_option("--stability", stability_path, "Stability-vs-reference table");
  seasonal->add_option("--approach", approach, "1 or 2 (default both)")
      ->check(CLI::IsMember({1, 2}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    eva::Config c = load_config(common);
    if (synth->parsed()) return run_synth(c, out_path, truth_path, spec_out, mc_years);
    if (report->parsed()) {
      const eva::PipelineSummary s = eva::run_pipeline(c);
      std::cerr << s.cells << " cells, " << s.rows << " rows, " << s.failed_rows
                << " unconverged\n";
      return 0;
    }
    if (fit_gev->parsed()) {
      c.methods = {eva::Method::Gev};
    } else if (empirical->parsed()) {
      c.methods = {eva::Method::Empirical};
    } else if (fit_pot->parsed()) {
      c.methods = {eva::Method::Pot};
      c.q_max = q > 0 ? q : c.reference_tail_probability();
      c.thresholds = 1;
      c.reference_index = 0;
    } else if (sweep->parsed()) {
      c.methods = {eva::Method::Pot};
    } else if (seasonal->parsed()) {
      c.methods.clear();
      if (approach != 2) c.methods.push_back(eva::Method::Seasonal1);
      if (approach != 1) c.methods.push_back(eva::Method::Seasonal2);
    }
    c.validate();
    const auto rows = eva::analyze_input(c);
    emit_rows(out_path, rows);
    if (!stability_path.empty()) {
      auto out = open_output(stability_path);
      eva::write_stability(out, rows, c.reference_tail_probability());
      if (!out.flush()) throw eva::IoError("write failed for " + stability_path);
    }
    return 0;
  } catch (const eva::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const eva::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
