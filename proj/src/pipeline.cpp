#include "eva/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "eva/aep.hpp"
#include "eva/empirical.hpp"
#include "eva/errors.hpp"
#include "eva/io.hpp"
#include "eva/parallel.hpp"
#include "eva/seasonal.hpp"
#include "eva/synthetic.hpp"
#include "eva/threshold_sweep.hpp"

namespace eva {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T v{};
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ConfigError("config: bad value '" + text + "' for " + key);
  return v;
}

Method parse_method_name(const std::string& name) {
  for (Method m : {Method::Gev, Method::Pot, Method::Seasonal1, Method::Seasonal2,
                   Method::Empirical})
    if (method_name(m) == name) return m;
  throw ConfigError("config: unknown method '" + name +
                    "' (expected gev, pot, seasonal-1, seasonal-2 or empirical)");
}

// Tail probabilities do not depend on the record length, so a schedule built
// for a very long record supplies them even when the cell is too short.
std::vector<double> tail_grid(const Config& c) {
  return build_schedule(std::size_t{1} << 50, c.q_max, c.q_min, c.thresholds).tail_probabilities;
}

ReportRow base_row(const DailySeries& s, Method m, std::optional<double> q, double period) {
  ReportRow r;
  r.cell = s.id;
  r.method = m;
  r.tail_probability = q;
  r.period = period;
  return r;
}

void fill_fit(ReportRow& r, const FitResult& fit) {
  r.n_used = fit.n_used;
  r.mu = fit.params.mu;
  r.sigma = fit.params.sigma;
  r.xi = fit.params.xi;
  r.se_xi = fit.standard_errors()[2];
  r.converged = fit.converged;
}

void fill_aep(ReportRow& r, const AepEstimate& a) {
  r.aep = a.value;
  r.aep_se = a.se.value_or(ReportRow::kMissing);
  r.relative_uncertainty = a.relative_uncertainty.value_or(ReportRow::kMissing);
}

void append_failures(std::vector<ReportRow>& rows, const DailySeries& s, Method m,
                     const std::vector<std::optional<double>>& qs, const Config& c,
                     const std::string& note) {
  for (const auto& q : qs)
    for (double t : c.periods) {
      ReportRow r = base_row(s, m, q, t);
      r.note = note;
      rows.push_back(std::move(r));
    }
}

void gev_rows(std::vector<ReportRow>& rows, const DailySeries& s, const Config& c) {
  try {
    const AnnualMaxima am = annual_maxima(s);
    const FitResult fit = fit_gev(am.values, c.optimizer());
    for (double t : c.periods) {
      ReportRow r = base_row(s, Method::Gev, std::nullopt, t);
      fill_fit(r, fit);
      if (fit.converged)
        fill_aep(r, aep_with_uncertainty(fit, t));
      else
        r.note = "optimizer did not converge";
      rows.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    append_failures(rows, s, Method::Gev, {std::nullopt}, c, e.what());
  }
}

void pot_rows(std::vector<ReportRow>& rows, const DailySeries& s, const Config& c) {
  std::vector<SweepRow> sweep;
  try {
    const ThresholdSchedule schedule =
        build_schedule(s.values.size(), c.q_max, c.q_min, c.thresholds);
    sweep = run_sweep(s.values, static_cast<double>(s.n_years()), schedule, c.periods,
                      c.optimizer());
  } catch (const std::exception& e) {
    const auto grid = tail_grid(c);
    append_failures(rows, s, Method::Pot, {grid.begin(), grid.end()}, c, e.what());
    return;
  }
  for (const SweepRow& sr : sweep)
    for (std::size_t t = 0; t < c.periods.size(); ++t) {
      ReportRow r = base_row(s, Method::Pot, sr.tail_probability, c.periods[t]);
      fill_fit(r, sr.fit);
      if (sr.fit.converged) fill_aep(r, sr.aep[t]);
      r.note = sr.note;
      rows.push_back(std::move(r));
    }
}

std::string season_notes(const SeasonalResult& res) {
  std::string out;
  for (Season s : kSeasons) {
    const SeasonSlot& slot = res.seasons[static_cast<int>(s)];
    if (slot.note.empty()) continue;
    if (!out.empty()) out += "; ";
    out += std::string(season_name(s)) + ": " + slot.note;
  }
  return out;
}

void seasonal_rows(std::vector<ReportRow>& rows, const DailySeries& s, const Config& c,
                   Method m) {
  std::vector<SeasonalResult> results;
  try {
    const ThresholdSchedule schedule =
        build_schedule(s.values.size(), c.q_max, c.q_min, c.thresholds);
    results = m == Method::Seasonal1
                  ? seasonal_fit_approach1(s, schedule, c.periods, c.optimizer())
                  : seasonal_fit_approach2(s, schedule, c.periods, c.optimizer());
  } catch (const std::exception& e) {
    auto grid = tail_grid(c);
    if (m == Method::Seasonal1) grid.resize(grid.size() > 2 ? grid.size() - 2 : 0);
    append_failures(rows, s, m, {grid.begin(), grid.end()}, c, e.what());
    return;
  }
  for (const SeasonalResult& res : results)
    for (std::size_t t = 0; t < c.periods.size(); ++t) {
      ReportRow r = base_row(s, m, res.tail_probability, c.periods[t]);
      const auto& combined = res.combined[t];
      if (combined) {
        const SeasonFit& sf = *res.seasons[static_cast<int>(combined->season)].fit;
        fill_fit(r, sf.fit);
        fill_aep(r, combined->estimate);
        r.season = season_name(combined->season);
      } else {
        r.n_used = res.count;
      }
      r.note = season_notes(res);
      rows.push_back(std::move(r));
    }
}

void empirical_rows(std::vector<ReportRow>& rows, const DailySeries& s, const Config& c) {
  std::optional<AnnualMaxima> am;
  try {
    am = annual_maxima(s);
  } catch (const std::exception& e) {
    append_failures(rows, s, Method::Empirical, {std::nullopt}, c, e.what());
    return;
  }
  for (double t : c.periods) {
    ReportRow r = base_row(s, Method::Empirical, std::nullopt, t);
    r.n_used = am->n_years();
    try {
      r.aep = empirical_aep(am->values, t, c.empirical_guard);
      r.converged = true;
    } catch (const std::exception& e) {
      r.note = e.what();
    }
    rows.push_back(std::move(r));
  }
}

MixtureSpec mixture(const Config& c) {
  if (!c.spec.empty()) return read_mixture_spec_file(c.spec);
  try {
    return preset(c.preset);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void write_file(const std::filesystem::path& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "input") {
    input = v;
  } else if (key == "output_dir") {
    output_dir = v;
  } else if (key == "methods") {
    methods.clear();
    for (const auto& name : split_list(v)) methods.push_back(parse_method_name(name));
  } else if (key == "periods") {
    periods.clear();
    for (const auto& p : split_list(v)) periods.push_back(parse_value<double>(key, p));
  } else if (key == "q_max") {
    q_max = parse_value<double>(key, v);
  } else if (key == "q_min") {
    q_min = parse_value<double>(key, v);
  } else if (key == "thresholds") {
    thresholds = parse_value<int>(key, v);
  } else if (key == "reference_index") {
    reference_index = parse_value<std::size_t>(key, v);
  } else if (key == "workers") {
    workers = parse_value<unsigned>(key, v);
  } else if (key == "seed") {
    seed = parse_value<std::uint64_t>(key, v);
  } else if (key == "preset") {
    preset = v;
  } else if (key == "spec") {
    spec = v;
  } else if (key == "cells") {
    cells = parse_value<std::size_t>(key, v);
  } else if (key == "years") {
    years = parse_value<std::size_t>(key, v);
  } else if (key == "empirical_guard") {
    empirical_guard = parse_value<double>(key, v);
  } else if (key == "min_maxima") {
    min_maxima = parse_value<std::size_t>(key, v);
  } else if (key == "min_exceedances") {
    min_exceedances = parse_value<std::size_t>(key, v);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

void Config::validate() const {
  if (methods.empty()) throw ConfigError("config: no methods selected");
  if (periods.empty()) throw ConfigError("config: no return periods");
  for (double t : periods)
    if (!(t > 1) || !std::isfinite(t))
      throw ConfigError("config: return period must exceed 1, got " + format_number(t));
  try {
    tail_grid(*this);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (reference_index >= static_cast<std::size_t>(thresholds))
    throw ConfigError("config: reference_index " + std::to_string(reference_index) +
                      " outside a schedule of " + std::to_string(thresholds));
  if (workers < 1) throw ConfigError("config: workers must be at least 1");
  if (input.empty() && (cells < 1 || years < 1))
    throw ConfigError("config: synthesis needs cells >= 1 and years >= 1");
  if (!(empirical_guard > 0)) throw ConfigError("config: empirical_guard must be positive");
  if (min_maxima < 3 || min_exceedances < 3)
    throw ConfigError("config: fit floors must be at least 3");
}

OptimizerSettings Config::optimizer() const {
  OptimizerSettings s;
  s.min_maxima = min_maxima;
  s.min_exceedances = min_exceedances;
  return s;
}

double Config::reference_tail_probability() const { return tail_grid(*this).at(reference_index); }

Config read_config(std::istream& in, Config base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    base.set(trim(std::string_view(line).substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

Config read_config_file(const std::string& path, Config base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return read_config(in, std::move(base));
}

std::vector<ReportRow> analyze_cell(const DailySeries& series, const Config& config) {
  std::vector<ReportRow> rows;
  std::string data_error;
  try {
    validate(series);
  } catch (const std::exception& e) {
    data_error = e.what();
  }
  for (Method m : config.methods) {
    if (!data_error.empty()) {
      std::vector<std::optional<double>> qs{std::nullopt};
      if (m != Method::Gev && m != Method::Empirical) {
        auto grid = tail_grid(config);
        if (m == Method::Seasonal1) grid.resize(grid.size() > 2 ? grid.size() - 2 : 0);
        qs.assign(grid.begin(), grid.end());
      }
      append_failures(rows, series, m, qs, config, data_error);
      continue;
    }
    switch (m) {
      case Method::Gev: gev_rows(rows, series, config); break;
      case Method::Pot: pot_rows(rows, series, config); break;
      case Method::Seasonal1:
      case Method::Seasonal2: seasonal_rows(rows, series, config, m); break;
      case Method::Empirical: empirical_rows(rows, series, config); break;
    }
  }
  sort_rows(rows, {series.id});
  return rows;
}

std::vector<ReportRow> analyze_input(const Config& config) {
  config.validate();
  std::vector<ReportRow> out;
  const unsigned workers = std::max(1u, config.workers);

  auto run_batch = [&](std::size_t n, const auto& cell_at) {
    std::vector<std::vector<ReportRow>> results(n);
    parallel_for(n, workers, [&](std::size_t i) { results[i] = analyze_cell(cell_at(i), config); });
    for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(out));
  };

  if (config.input.empty()) {
    const MixtureSpec spec = mixture(config);
    try {
      spec.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("mixture spec: ") + e.what());
    }
    for (std::size_t first = 0; first < config.cells; first += workers) {
      const std::size_t n = std::min<std::size_t>(workers, config.cells - first);
      run_batch(n, [&](std::size_t i) {
        return generate_cell(spec, config.years, config.seed,
                             static_cast<std::uint32_t>(first + i));
      });
    }
  } else if (std::filesystem::path(config.input).extension() == ".csv") {
    const std::vector<DailySeries> cells = read_csv(config.input);
    run_batch(cells.size(), [&](std::size_t i) -> const DailySeries& { return cells[i]; });
  } else {
    StoreReader reader(config.input);
    for (;;) {
      std::vector<DailySeries> batch;
      while (batch.size() < workers) {
        auto cell = reader.next();
        if (!cell) break;
        batch.push_back(std::move(*cell));
      }
      if (batch.empty()) break;
      run_batch(batch.size(), [&](std::size_t i) -> const DailySeries& { return batch[i]; });
    }
  }
  return out;
}

PipelineSummary run_pipeline(const Config& config) {
  const std::vector<ReportRow> rows = analyze_input(config);
  const double ref_q = config.reference_tail_probability();

  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  write_file(dir / "report.csv", [&](std::ostream& o) { write_report_csv(o, rows); });
  write_file(dir / "report.json", [&](std::ostream& o) { write_report_json(o, rows); });
  write_file(dir / "fit_vs_empirical.csv",
             [&](std::ostream& o) { write_fit_vs_empirical(o, rows); });
  write_file(dir / "stability.csv", [&](std::ostream& o) { write_stability(o, rows, ref_q); });
  write_file(dir / "seasonal_vs_full_year.csv",
             [&](std::ostream& o) { write_seasonal_vs_full_year(o, rows); });
  write_file(dir / "uncertainty_vs_shape.csv",
             [&](std::ostream& o) { write_uncertainty_vs_shape(o, rows, ref_q); });

  PipelineSummary summary;
  std::vector<std::string> seen;
  for (const ReportRow& r : rows) {
    if (seen.empty() || seen.back() != r.cell) seen.push_back(r.cell);
    if (!r.converged) ++summary.failed_rows;
  }
  summary.cells = seen.size();
  summary.rows = rows.size();
  return summary;
}

}  // namespace eva
