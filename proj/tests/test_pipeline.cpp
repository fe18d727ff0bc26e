#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "eva/errors.hpp"
#include "eva/io.hpp"
#include "eva/pipeline.hpp"
#include "eva/synthetic.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("eva_pipe_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

eva::Config small_config() {
  eva::Config c;
  c.thresholds = 4;
  c.reference_index = 1;
  c.q_max = 1e-2;
  c.q_min = 1e-3;
  c.periods = {10, 100};
  c.cells = 3;
  c.years = 120;
  c.seed = 11;
  return c;
}

const std::vector<std::string> kOutputs{"report.csv",        "report.json",
                                        "fit_vs_empirical.csv", "stability.csv",
                                        "seasonal_vs_full_year.csv", "uncertainty_vs_shape.csv"};

int run_cli(const std::string& args) {
  const char* cli = std::getenv("EVA_CLI");
  REQUIRE(cli != nullptr);
  const int status = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# experiment\n"
      "methods = gev, pot  # two of them\n"
      "periods = 50, 500\n"
      "q_max = 1e-2\n"
      "thresholds = 3\n"
      "reference_index = 0\n"
      "workers = 4\n");
  const auto c = eva::read_config(in);
  CHECK(c.methods == std::vector<eva::Method>{eva::Method::Gev, eva::Method::Pot});
  CHECK(c.periods == std::vector<double>{50, 500});
  CHECK(c.q_max == 0.01);
  CHECK(c.workers == 4);
  CHECK_NOTHROW(c.validate());
  CHECK(c.reference_tail_probability() == 0.01);

  eva::Config d;
  CHECK_THROWS_AS(d.set("colour", "red"), eva::ConfigError);
  CHECK_THROWS_AS(d.set("q_max", "abc"), eva::ConfigError);
  CHECK_THROWS_AS(d.set("methods", "gev, weibull"), eva::ConfigError);
  std::istringstream no_eq("thresholds 4\n");
  CHECK_THROWS_AS(eva::read_config(no_eq), eva::ConfigError);

  d = eva::Config{};
  d.periods = {1.0};
  CHECK_THROWS_AS(d.validate(), eva::ConfigError);
  d = eva::Config{};
  d.reference_index = 10;
  CHECK_THROWS_AS(d.validate(), eva::ConfigError);
  d = eva::Config{};
  d.q_min = 1e-2;
  CHECK_THROWS_AS(d.validate(), eva::ConfigError);
  d = eva::Config{};
  d.thresholds = 1;
  d.reference_index = 0;
  CHECK_NOTHROW(d.validate());
  CHECK(d.reference_tail_probability() == d.q_max);
  CHECK_THROWS_AS(eva::read_config_file("/nonexistent/eva.conf"), eva::ConfigError);
}

TEST_CASE("single threshold gives one row per period") {
  auto c = small_config();
  c.methods = {eva::Method::Pot};
  c.thresholds = 1;
  c.reference_index = 0;
  c.periods = {10, 50, 100};
  const auto cell = eva::generate_cell(eva::preset("precip-homogeneous"), 200, 3);
  const auto rows = eva::analyze_cell(cell, c);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.converged);
    CHECK(*r.tail_probability == 1e-2);
    CHECK(r.n_used == 730);
  }
  CHECK(rows[0].aep < rows[1].aep);
  CHECK(rows[1].aep < rows[2].aep);
}

TEST_CASE("row layout per cell") {
  const auto c = small_config();
  const auto cell = eva::generate_cell(eva::preset("precip-mixture"), c.years, c.seed);
  const auto rows = eva::analyze_cell(cell, c);
  // gev + pot + seasonal-1 (schedule minus its two highest entries) + seasonal-2 + empirical
  CHECK(rows.size() == 2 + 4 * 2 + 2 * 2 + 4 * 2 + 2);
  CHECK(rows.front().method == eva::Method::Gev);
  CHECK(rows.back().method == eva::Method::Empirical);
  // 120 years with a guard of 2 resolves T = 10 but not T = 100.
  CHECK(rows[rows.size() - 2].converged);
  CHECK_FALSE(rows.back().converged);
  CHECK_FALSE(rows.back().note.empty());
}

TEST_CASE("bad cells become failure rows") {
  auto c = small_config();
  eva::DailySeries bad = eva::generate_cell(eva::preset("precip-mixture"), 20, 1);
  bad.values[10] = std::nan("");
  const auto rows = eva::analyze_cell(bad, c);
  CHECK(rows.size() == 2 + 4 * 2 + 2 * 2 + 4 * 2 + 2);
  for (const auto& r : rows) {
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.note.empty());
  }

  eva::DailySeries short_cell = eva::generate_cell(eva::preset("precip-mixture"), 2, 1);
  const auto few = eva::analyze_cell(short_cell, c);
  CHECK(few.size() == rows.size());
  for (const auto& r : few)
    if (r.method == eva::Method::Gev) CHECK(r.note.find("10") != std::string::npos);
}

TEST_CASE("outputs are identical for any worker count") {
  TempDir dir;
  auto c = small_config();
  c.output_dir = dir.file("w1");
  c.workers = 1;
  const auto s1 = eva::run_pipeline(c);
  c.output_dir = dir.file("w8");
  c.workers = 8;
  const auto s8 = eva::run_pipeline(c);
  CHECK(s1.cells == 3);
  CHECK(s1.rows == s8.rows);
  CHECK(s1.failed_rows == s8.failed_rows);
  for (const auto& f : kOutputs) {
    const auto a = slurp(dir.file("w1/" + f));
    CHECK(!a.empty());
    CHECK(a == slurp(dir.file("w8/" + f)));
  }
}

TEST_CASE("store, CSV and synthesized input agree") {
  TempDir dir;
  auto c = small_config();
  c.cells = 2;
  std::vector<eva::DailySeries> cells;
  const auto spec = eva::preset(c.preset);
  for (std::uint32_t i = 0; i < 2; ++i) cells.push_back(eva::generate_cell(spec, c.years, c.seed, i));
  eva::write_store(dir.file("in.eva"), cells);
  {
    std::ofstream out(dir.file("in.csv"));
    eva::write_csv(out, cells);
  }
  c.output_dir = dir.file("synth");
  eva::run_pipeline(c);
  c.input = dir.file("in.eva");
  c.output_dir = dir.file("store");
  eva::run_pipeline(c);
  c.input = dir.file("in.csv");
  c.output_dir = dir.file("csv");
  eva::run_pipeline(c);
  CHECK(slurp(dir.file("synth/report.csv")) == slurp(dir.file("store/report.csv")));
  CHECK(slurp(dir.file("synth/report.csv")) == slurp(dir.file("csv/report.csv")));

  c.input = dir.file("missing.eva");
  CHECK_THROWS_AS(eva::run_pipeline(c), eva::IoError);
}

TEST_CASE("command line exit codes") {
  TempDir dir;
  const std::string store = dir.file("s.eva");
  CHECK(run_cli("synth --preset precip-homogeneous --cells 2 --years 60 --out " + store) == 0);
  CHECK(fs::exists(store));
  CHECK(run_cli("fit-gev --input " + store + " --periods 10 --out " + dir.file("gev.csv")) == 0);
  CHECK(slurp(dir.file("gev.csv")).find("cell-0001,gev") != std::string::npos);
  CHECK(run_cli("report --input " + store + " --thresholds 3 --reference-index 0 --q-max 1e-2"
                " --q-min 1e-3 --periods 10 --output-dir " + dir.file("out")) == 0);
  for (const auto& f : kOutputs) CHECK(fs::exists(dir.file("out/" + f)));

  CHECK(run_cli("report --input " + store + " --q-max abc") == 1);
  CHECK(run_cli("report --input " + store + " --thresholds 3 --reference-index 7") == 1);
  CHECK(run_cli("synth --preset nope --out " + dir.file("x.eva")) == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("report --input " + dir.file("missing.eva")) == 2);
  {
    std::ofstream junk(dir.file("junk.eva"), std::ios::binary);
    junk << "not a store";
  }
  CHECK(run_cli("fit-gev --input " + dir.file("junk.eva")) == 2);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("desk-scale experiment") {
  TempDir dir;
  eva::Config c;
  c.cells = 20;
  c.years = 10560;
  c.seed = 21;
  c.workers = 2;
  c.output_dir = dir.file("desk");
  const auto summary = eva::run_pipeline(c);
  CHECK(summary.cells == 20);
  // Per cell: 3 GEV, 30 POT, 24 seasonal-1, 30 seasonal-2, 3 empirical.
  CHECK(summary.rows == 20 * 90);

  std::ifstream in(dir.file("desk/report.csv"));
  const auto rows = eva::read_report_csv(in);
  REQUIRE(rows.size() == summary.rows);

  std::vector<oracle::SeasonMixture> seasons;
  for (int s = 0; s < 4; ++s) {
    const int days[] = {90, 92, 92, 91};
    oracle::SeasonMixture m{days[s], {{oracle::MixtureComponent::Gamma, 0.8, 5.0, 0, 0.35}}};
    if (s >= 2) m.components.push_back({oracle::MixtureComponent::Gpd, 5.0, 15.0, 0.05, 2.0 / 183.0});
    seasons.push_back(m);
  }
  const double truth = oracle::mixture_return_level(seasons, 0.0, 1000);
  const double q_ref = c.reference_tail_probability();
  const double q_low = c.q_max, q_high = c.q_min;

  std::vector<double> gev, pot, empirical, xi_low, xi_high;
  for (const auto& r : rows) {
    if (r.method == eva::Method::Pot) {
      CHECK(r.converged);
      if (*r.tail_probability == q_low && r.period == 1000) xi_low.push_back(r.xi);
      if (*r.tail_probability == q_high && r.period == 1000) xi_high.push_back(r.xi);
    }
    if (r.period != 1000 || !r.converged) continue;
    if (r.method == eva::Method::Gev) gev.push_back(r.aep / truth);
    if (r.method == eva::Method::Empirical) empirical.push_back(r.aep / truth);
    if (r.method == eva::Method::Pot && *r.tail_probability == q_ref) pot.push_back(r.aep / truth);
  }
  REQUIRE(gev.size() == 20);
  REQUIRE(pot.size() == 20);
  REQUIRE(empirical.size() == 20);
  CHECK(oracle::median(gev) > 1);
  CHECK(oracle::median(pot) > 0.9);
  CHECK(oracle::median(pot) < 1.1);
  CHECK(std::abs(oracle::median(empirical) - 1) < 0.1);
  CHECK(oracle::median(xi_high) < oracle::median(xi_low));

  // The figure tables rebuild from the report alone.
  std::ostringstream stab;
  eva::write_stability(stab, rows, q_ref);
  CHECK(stab.str() == slurp(dir.file("desk/stability.csv")));
  std::ostringstream seas;
  eva::write_seasonal_vs_full_year(seas, rows);
  CHECK(seas.str() == slurp(dir.file("desk/seasonal_vs_full_year.csv")));
}
