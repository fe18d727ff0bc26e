#include "eva/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>

#include "eva/distributions.hpp"
#include "eva/empirical.hpp"
#include "eva/errors.hpp"
#include "eva/parallel.hpp"
#include "eva/random.hpp"

namespace eva {

namespace {

constexpr int kDaysPerYear = 365;

const std::array<Season, kDaysPerYear>& season_table() {
  static const auto table = [] {
    std::array<Season, kDaysPerYear> t{};
    for (int d = 1; d <= kDaysPerYear; ++d) t[d - 1] = assign_season(d);
    return t;
  }();
  return table;
}

std::array<int, 4> season_lengths() {
  std::array<int, 4> n{};
  for (Season s : season_table()) ++n[static_cast<int>(s)];
  return n;
}

double draw(const Magnitude& m, CounterStream& rng) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GammaMagnitude>) {
          return d.scale * rng.gamma(d.shape);
        } else if constexpr (std::is_same_v<T, GpdMagnitude>) {
          return gpd_quantile(GpdParams<double>{d.threshold, d.scale, d.shape}, rng.uniform());
        } else {
          return gev_quantile(GevParams<double>{d.location, d.scale, d.shape}, rng.uniform());
        }
      },
      m);
}

// Maximum of k iid magnitudes. Closed-form distributions use the inverse
// CDF at U^(1/k); gamma magnitudes are drawn one by one.
double draw_max(const Magnitude& m, unsigned k, CounterStream& rng) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GammaMagnitude>) {
          double best = -std::numeric_limits<double>::infinity();
          for (unsigned i = 0; i < k; ++i) best = std::max(best, d.scale * rng.gamma(d.shape));
          return best;
        } else if constexpr (std::is_same_v<T, GpdMagnitude>) {
          // Survival probability of the max: 1 - U^(1/k).
          const double log_surv = std::log(-std::expm1(std::log(rng.uniform()) / k));
          if (detail::near_zero_shape(d.shape)) return d.threshold - d.scale * log_surv;
          return d.threshold + d.scale * std::expm1(-d.shape * log_surv) / d.shape;
        } else {
          // -log of the max's CDF value: -log(U)/k.
          const double log_y = std::log(-std::log(rng.uniform()) / k);
          if (detail::near_zero_shape(d.shape)) return d.location - d.scale * log_y;
          return d.location + d.scale * std::expm1(-d.shape * log_y) / d.shape;
        }
      },
      m);
}

void scale_magnitude(Magnitude& m, double factor) {
  std::visit([&](auto& d) { d.scale *= factor; }, m);
}

// Precomputed per-day model for a cell.
struct DayModel {
  std::array<std::vector<double>, 4> cumulative;   // cumulative type probabilities
  std::array<double, kDaysPerYear> baseline{};
};

DayModel make_day_model(const MixtureSpec& spec) {
  DayModel dm;
  for (int s = 0; s < 4; ++s) {
    double c = 0;
    for (const StormType& t : spec.seasons[s]) {
      c += t.probability;
      dm.cumulative[s].push_back(c);
    }
  }
  for (int d = 1; d <= kDaysPerYear; ++d) dm.baseline[d - 1] = spec.baseline.at(d);
  return dm;
}

double simulate_day(const MixtureSpec& spec, const DayModel& dm, int doy, CounterStream& rng) {
  const int s = static_cast<int>(season_table()[doy - 1]);
  const double u = rng.uniform();
  const auto& cum = dm.cumulative[s];
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  double value = dm.baseline[doy - 1];
  if (it != cum.end()) value += draw(spec.seasons[s][it - cum.begin()].magnitude, rng);
  return value;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double Baseline::at(int day_of_year) const {
  if (amplitude == 0) return mean;
  return mean + amplitude * std::cos(2.0 * std::numbers::pi * (day_of_year - peak_day) / 365.0);
}

MixtureSpec& MixtureSpec::add(const StormType& type, std::initializer_list<Season> in_seasons) {
  for (Season s : in_seasons) seasons[static_cast<int>(s)].push_back(type);
  return *this;
}

void MixtureSpec::validate() const {
  if (cells < 1) throw std::invalid_argument("mixture spec: cells must be at least 1");
  if (!(jitter >= 0 && std::isfinite(jitter)))
    throw std::invalid_argument("mixture spec: jitter must be finite and non-negative");
  if (!std::isfinite(baseline.mean) || !std::isfinite(baseline.amplitude))
    throw std::invalid_argument("mixture spec: baseline must be finite");
  for (Season season : kSeasons) {
    double total = 0;
    for (const StormType& t : seasons[static_cast<int>(season)]) {
      const std::string where =
          "mixture spec: type '" + t.name + "' in " + std::string(season_name(season));
      if (!(t.probability >= 0 && t.probability <= 1))
        throw std::invalid_argument(where + ": probability outside [0, 1]");
      total += t.probability;
      std::visit(
          [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, GammaMagnitude>) {
              if (!(d.shape > 0 && d.scale > 0 && std::isfinite(d.shape) && std::isfinite(d.scale)))
                throw std::invalid_argument(where + ": gamma shape and scale must be positive");
            } else {
              if (!(d.scale > 0 && std::isfinite(d.scale) && std::isfinite(d.shape)))
                throw std::invalid_argument(where + ": scale must be positive");
              if constexpr (std::is_same_v<T, GpdMagnitude>) {
                if (!std::isfinite(d.threshold))
                  throw std::invalid_argument(where + ": threshold must be finite");
              } else if (!std::isfinite(d.location)) {
                throw std::invalid_argument(where + ": location must be finite");
              }
            }
          },
          t.magnitude);
    }
    if (total > 1.0 + 1e-12)
      throw std::invalid_argument("mixture spec: probabilities in " +
                                  std::string(season_name(season)) + " sum to " +
                                  format_double(total) + " > 1");
  }
}

MixtureSpec cell_spec(const MixtureSpec& spec, std::uint32_t cell, std::uint64_t seed) {
  MixtureSpec out = spec;
  if (spec.jitter == 0) return out;
  CounterStream rng(seed, stream_domain::kJitter, cell, 0);
  const double factor = std::exp(spec.jitter * rng.normal());
  for (auto& types : out.seasons)
    for (StormType& t : types) scale_magnitude(t.magnitude, factor);
  return out;
}

DailySeries generate_cell(const MixtureSpec& spec, std::size_t n_years, std::uint64_t seed,
                          std::uint32_t cell, unsigned workers) {
  spec.validate();
  const MixtureSpec local = cell_spec(spec, cell, seed);
  const DayModel dm = make_day_model(local);

  DailySeries out;
  char id[32];
  std::snprintf(id, sizeof id, "cell-%04u", cell);
  out.id = id;
  out.start_year = 1;
  out.leap_days = false;
  out.variable = spec.variable;
  out.units = spec.units;
  out.values.resize(n_years * kDaysPerYear);

  constexpr std::size_t kChunkYears = 64;
  const std::size_t chunks = (n_years + kChunkYears - 1) / kChunkYears;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t y_end = std::min(n_years, (c + 1) * kChunkYears);
    for (std::size_t y = c * kChunkYears; y < y_end; ++y) {
      for (int d = 1; d <= kDaysPerYear; ++d) {
        const std::size_t index = y * kDaysPerYear + static_cast<std::size_t>(d - 1);
        CounterStream rng(seed, stream_domain::kDaily, cell, index);
        out.values[index] = simulate_day(local, dm, d, rng);
      }
    }
  });
  return out;
}

std::vector<double> simulate_annual_maxima(const MixtureSpec& spec, std::size_t first_year,
                                           std::size_t n_years, std::uint64_t seed,
                                           std::uint32_t cell) {
  const MixtureSpec local = cell_spec(spec, cell, seed);
  const DayModel dm = make_day_model(local);
  const std::array<int, 4> lengths = season_lengths();
  std::vector<double> out(n_years);

  for (std::size_t i = 0; i < n_years; ++i) {
    const std::size_t year = first_year + i;
    CounterStream rng(seed, stream_domain::kTruth, cell, year);
    double best = -std::numeric_limits<double>::infinity();
    if (local.baseline.constant()) {
      // Multinomial type counts per season, then the max of each type's draws.
      for (int s = 0; s < 4; ++s) {
        unsigned remaining = static_cast<unsigned>(lengths[s]);
        double remaining_prob = 1.0;
        for (const StormType& t : local.seasons[s]) {
          if (remaining == 0) break;
          const double p =
              remaining_prob > 0 ? std::min(1.0, t.probability / remaining_prob) : 0.0;
          const unsigned k = rng.binomial(remaining, p);
          remaining -= k;
          remaining_prob -= t.probability;
          if (k > 0) best = std::max(best, local.baseline.mean + draw_max(t.magnitude, k, rng));
        }
        if (remaining > 0) best = std::max(best, local.baseline.mean);
      }
    } else {
      for (int d = 1; d <= kDaysPerYear; ++d) best = std::max(best, simulate_day(local, dm, d, rng));
    }
    out[i] = best;
  }
  return out;
}

TruthRecord true_quantile(const MixtureSpec& spec, double period, std::size_t mc_years,
                          std::uint64_t seed, std::uint32_t cell, unsigned workers) {
  spec.validate();
  if (!(period > 1)) throw std::domain_error("true_quantile: period must exceed 1");
  if (static_cast<double>(mc_years) < period)
    throw std::invalid_argument("true_quantile: " + std::to_string(mc_years) +
                                " Monte Carlo years cannot resolve 1-in-" + format_double(period));
  constexpr std::size_t kBatches = 10;
  const std::size_t per_batch = mc_years / kBatches;
  const std::size_t used = per_batch * kBatches;
  std::vector<double> maxima(used);
  parallel_for(kBatches, workers, [&](std::size_t b) {
    const auto part = simulate_annual_maxima(spec, b * per_batch, per_batch, seed, cell);
    std::copy(part.begin(), part.end(), maxima.begin() + static_cast<std::ptrdiff_t>(b * per_batch));
  });

  double mean = 0;
  std::array<double, kBatches> batch_q{};
  for (std::size_t b = 0; b < kBatches; ++b) {
    const std::span<const double> part(maxima.data() + b * per_batch, per_batch);
    batch_q[b] = empirical_aep(part, period, 0.0);
    mean += batch_q[b];
  }
  mean /= kBatches;
  double ss = 0;
  for (double q : batch_q) ss += (q - mean) * (q - mean);

  TruthRecord rec;
  rec.period = period;
  rec.mc_years = used;
  rec.value = empirical_aep(maxima, period, 0.0);
  rec.mc_standard_error = std::sqrt(ss / (kBatches - 1) / kBatches);
  return rec;
}

std::vector<std::string> preset_names() {
  return {"precip-mixture", "precip-homogeneous", "temperature-bounded", "precip-jja-extremes"};
}

MixtureSpec preset(std::string_view name) {
  using enum Season;
  MixtureSpec spec;
  const StormType convective{"convective", 0.35, GammaMagnitude{0.8, 5.0}};
  if (name == "precip-mixture") {
    // Rare heavy events about twice a year, June through November.
    spec.add(convective, {DJF, MAM, JJA, SON});
    spec.add({"tropical", 2.0 / 183.0, GpdMagnitude{5.0, 15.0, 0.05}}, {JJA, SON});
  } else if (name == "precip-jja-extremes") {
    spec.add(convective, {DJF, MAM, JJA, SON});
    spec.add({"tropical", 2.0 / 92.0, GpdMagnitude{5.0, 15.0, 0.05}}, {JJA});
  } else if (name == "precip-homogeneous") {
    spec.add({"storm", 0.3, GpdMagnitude{0.0, 8.0, 0.1}}, {DJF, MAM, JJA, SON});
  } else if (name == "temperature-bounded") {
    spec.variable = "tasmax";
    spec.units = "K";
    spec.baseline = {288.0, 10.0, 200};
    spec.add({"daily", 1.0, GevMagnitude{0.0, 2.5, -0.2}}, {DJF, MAM, JJA, SON});
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'; known presets: " +
                                known);
  }
  spec.validate();
  return spec;
}

double upper_bound(const MixtureSpec& spec) {
  double top_baseline = spec.baseline.mean + std::abs(spec.baseline.amplitude);
  double top = top_baseline;   // quiet days
  for (const auto& types : spec.seasons) {
    for (const StormType& t : types) {
      if (t.probability == 0) continue;
      const double m = std::visit(
          [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, GammaMagnitude>) {
              return std::numeric_limits<double>::infinity();
            } else if constexpr (std::is_same_v<T, GpdMagnitude>) {
              const auto b = support_bounds(GpdParams<double>{d.threshold, d.scale, d.shape});
              return b.upper.value_or(std::numeric_limits<double>::infinity());
            } else {
              const auto b = support_bounds(GevParams<double>{d.location, d.scale, d.shape});
              return b.upper.value_or(std::numeric_limits<double>::infinity());
            }
          },
          t.magnitude);
      top = std::max(top, top_baseline + m);
    }
  }
  return top;
}

// ---------------------------------------------------------------------------
// Text spec files

MixtureSpec read_mixture_spec(std::istream& in) {
  MixtureSpec spec;
  struct Section {
    std::string name;
    std::map<std::string, std::string> keys;
    int line = 0;
  };
  std::vector<Section> sections;
  std::map<std::string, std::string> top;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("spec line " + std::to_string(line_no) + ": unterminated section");
      std::istringstream hs(line.substr(1, line.size() - 2));
      std::string kind;
      std::string name;
      hs >> kind >> name;
      if (kind != "type" || name.empty())
        throw ConfigError("spec line " + std::to_string(line_no) +
                          ": expected [type <name>]");
      sections.push_back({name, {}, line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("spec line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto& target = sections.empty() ? top : sections.back().keys;
    if (!target.emplace(key, value).second)
      throw ConfigError("spec line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }

  auto number = [](const std::map<std::string, std::string>& m, const std::string& key,
                   const std::string& where, std::optional<double> fallback) -> double {
    const auto it = m.find(key);
    if (it == m.end()) {
      if (fallback) return *fallback;
      throw ConfigError(where + ": missing key '" + key + "'");
    }
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != it->second.size())
      throw ConfigError(where + ": key '" + key + "' is not a number: '" + it->second + "'");
    return v;
  };

  for (const auto& [key, value] : top) {
    if (key == "variable")
      spec.variable = value;
    else if (key == "units")
      spec.units = value;
    else if (key != "cells" && key != "jitter" && key != "baseline_mean" &&
             key != "baseline_amplitude" && key != "baseline_peak_day")
      throw ConfigError("spec: unknown key '" + key + "'");
  }
  spec.cells = static_cast<std::size_t>(number(top, "cells", "spec", 1.0));
  spec.jitter = number(top, "jitter", "spec", 0.0);
  spec.baseline.mean = number(top, "baseline_mean", "spec", 0.0);
  spec.baseline.amplitude = number(top, "baseline_amplitude", "spec", 0.0);
  spec.baseline.peak_day = static_cast<int>(number(top, "baseline_peak_day", "spec", 200.0));

  for (const Section& sec : sections) {
    const std::string where = "spec type '" + sec.name + "' (line " + std::to_string(sec.line) + ")";
    StormType t;
    t.name = sec.name;
    t.probability = number(sec.keys, "probability", where, std::nullopt);
    const auto dist = sec.keys.find("distribution");
    if (dist == sec.keys.end()) throw ConfigError(where + ": missing key 'distribution'");
    if (dist->second == "gamma") {
      t.magnitude = GammaMagnitude{number(sec.keys, "shape", where, std::nullopt),
                                   number(sec.keys, "scale", where, std::nullopt)};
    } else if (dist->second == "gpd") {
      t.magnitude = GpdMagnitude{number(sec.keys, "threshold", where, 0.0),
                                 number(sec.keys, "scale", where, std::nullopt),
                                 number(sec.keys, "shape", where, std::nullopt)};
    } else if (dist->second == "gev") {
      t.magnitude = GevMagnitude{number(sec.keys, "location", where, 0.0),
                                 number(sec.keys, "scale", where, std::nullopt),
                                 number(sec.keys, "shape", where, std::nullopt)};
    } else {
      throw ConfigError(where + ": distribution must be gamma, gpd or gev");
    }
    const auto seasons = sec.keys.find("seasons");
    std::istringstream ss(seasons == sec.keys.end() ? "DJF MAM JJA SON" : seasons->second);
    std::string token;
    while (ss >> token) {
      try {
        spec.seasons[static_cast<int>(parse_season(token))].push_back(t);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

void write_mixture_spec(std::ostream& out, const MixtureSpec& spec) {
  out << "# storm-type mixture spec\n";
  out << "variable = " << spec.variable << "\n";
  out << "units = " << spec.units << "\n";
  out << "cells = " << spec.cells << "\n";
  out << "jitter = " << format_double(spec.jitter) << "\n";
  out << "baseline_mean = " << format_double(spec.baseline.mean) << "\n";
  out << "baseline_amplitude = " << format_double(spec.baseline.amplitude) << "\n";
  out << "baseline_peak_day = " << spec.baseline.peak_day << "\n";

  auto body = [](const StormType& t) {
    std::ostringstream os;
    os << "probability = " << format_double(t.probability) << "\n";
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, GammaMagnitude>) {
            os << "distribution = gamma\nshape = " << format_double(d.shape)
               << "\nscale = " << format_double(d.scale) << "\n";
          } else if constexpr (std::is_same_v<T, GpdMagnitude>) {
            os << "distribution = gpd\nthreshold = " << format_double(d.threshold)
               << "\nscale = " << format_double(d.scale) << "\nshape = " << format_double(d.shape)
               << "\n";
          } else {
            os << "distribution = gev\nlocation = " << format_double(d.location)
               << "\nscale = " << format_double(d.scale) << "\nshape = " << format_double(d.shape)
               << "\n";
          }
        },
        t.magnitude);
    return os.str();
  };

  // Identical (name, parameters) entries across seasons share one section.
  std::vector<std::pair<std::string, std::string>> groups;   // (name + body, seasons)
  for (Season s : kSeasons) {
    for (const StormType& t : spec.seasons[static_cast<int>(s)]) {
      const std::string key = t.name + "\n" + body(t);
      auto it = std::find_if(groups.begin(), groups.end(),
                             [&](const auto& g) { return g.first == key; });
      if (it == groups.end()) {
        groups.emplace_back(key, std::string(season_name(s)));
      } else {
        it->second += " " + std::string(season_name(s));
      }
    }
  }
  for (const auto& [key, seasons] : groups) {
    const auto nl = key.find('\n');
    out << "\n[type " << key.substr(0, nl) << "]\n";
    out << "seasons = " << seasons << "\n";
    out << key.substr(nl + 1);
  }
}

MixtureSpec read_mixture_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file '" + path + "'");
  return read_mixture_spec(in);
}

void write_mixture_spec_file(const std::string& path, const MixtureSpec& spec) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write spec file '" + path + "'");
  write_mixture_spec(out, spec);
  if (!out) throw IoError("failed writing spec file '" + path + "'");
}

}  // namespace eva
