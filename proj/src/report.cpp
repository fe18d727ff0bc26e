#include "eva/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "eva/errors.hpp"

namespace eva {

namespace {

constexpr const char* kColumns =
    "cell,method,tail_probability,n_used,mu,sigma,xi,se_xi,period,aep,aep_se,"
    "relative_uncertainty,converged,season,note";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_number(const std::string& s) {
  if (s.empty()) return ReportRow::kMissing;
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw IoError("report: bad number '" + s + "'");
  return v;
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::Gev, Method::Pot, Method::Seasonal1, Method::Seasonal2,
                   Method::Empirical})
    if (method_name(m) == s) return m;
  throw IoError("report: unknown method '" + s + "'");
}

std::string tail_text(const ReportRow& r) {
  return r.tail_probability ? format_number(*r.tail_probability) : "annual";
}

// Key for joining rows of different methods of one cell.
using JoinKey = std::tuple<std::string, double, double>;   // cell, tail prob, period

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Gev: return "gev";
    case Method::Pot: return "pot";
    case Method::Seasonal1: return "seasonal-1";
    case Method::Seasonal2: return "seasonal-2";
    case Method::Empirical: return "empirical";
  }
  return "?";
}

std::string format_number(double x) {
  if (std::isnan(x)) return {};
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void sort_rows(std::vector<ReportRow>& rows, const std::vector<std::string>& cell_order) {
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < cell_order.size(); ++i) rank.emplace(cell_order[i], i);
  auto cell_rank = [&](const std::string& c) {
    const auto it = rank.find(c);
    return it == rank.end() ? cell_order.size() : it->second;
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const ReportRow& a, const ReportRow& b) {
    const auto ka = std::make_tuple(cell_rank(a.cell), a.cell, static_cast<int>(a.method),
                                    a.tail_probability.has_value(),
                                    -a.tail_probability.value_or(0.0), a.period);
    const auto kb = std::make_tuple(cell_rank(b.cell), b.cell, static_cast<int>(b.method),
                                    b.tail_probability.has_value(),
                                    -b.tail_probability.value_or(0.0), b.period);
    return ka < kb;
  });
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kColumns << "\n";
  for (const ReportRow& r : rows) {
    out << csv_escape(r.cell) << ',' << method_name(r.method) << ',' << tail_text(r) << ','
        << r.n_used << ',' << format_number(r.mu) << ',' << format_number(r.sigma) << ','
        << format_number(r.xi) << ',' << format_number(r.se_xi) << ','
        << format_number(r.period) << ',' << format_number(r.aep) << ','
        << format_number(r.aep_se) << ',' << format_number(r.relative_uncertainty) << ','
        << (r.converged ? "true" : "false") << ',' << r.season << ',' << csv_escape(r.note)
        << "\n";
  }
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kColumns) throw IoError("report: unexpected header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 15) throw IoError("report: expected 15 columns in '" + line + "'");
    ReportRow r;
    r.cell = f[0];
    r.method = parse_method(f[1]);
    if (f[2] != "annual") r.tail_probability = parse_number(f[2]);
    r.n_used = static_cast<std::size_t>(parse_number(f[3]));
    r.mu = parse_number(f[4]);
    r.sigma = parse_number(f[5]);
    r.xi = parse_number(f[6]);
    r.se_xi = parse_number(f[7]);
    r.period = parse_number(f[8]);
    r.aep = parse_number(f[9]);
    r.aep_se = parse_number(f[10]);
    r.relative_uncertainty = parse_number(f[11]);
    r.converged = f[12] == "true";
    r.season = f[13];
    r.note = f[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_report_json(std::ostream& out, const std::vector<ReportRow>& rows) {
  auto num = [](double x) -> nlohmann::ordered_json {
    if (std::isnan(x)) return nullptr;
    return x;
  };
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ReportRow& r : rows) {
    nlohmann::ordered_json j;
    j["cell"] = r.cell;
    j["method"] = method_name(r.method);
    if (r.tail_probability)
      j["tail_probability"] = *r.tail_probability;
    else
      j["tail_probability"] = "annual";
    j["n_used"] = r.n_used;
    j["mu"] = num(r.mu);
    j["sigma"] = num(r.sigma);
    j["xi"] = num(r.xi);
    j["se_xi"] = num(r.se_xi);
    j["period"] = r.period;
    j["aep"] = num(r.aep);
    j["aep_se"] = num(r.aep_se);
    j["relative_uncertainty"] = num(r.relative_uncertainty);
    j["converged"] = r.converged;
    j["season"] = r.season;
    j["note"] = r.note;
    arr.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["rows"] = std::move(arr);
  out << doc.dump(1) << "\n";
}

void write_fit_vs_empirical(std::ostream& out, const std::vector<ReportRow>& rows) {
  std::map<std::pair<std::string, double>, double> empirical;
  for (const ReportRow& r : rows)
    if (r.method == Method::Empirical && r.converged) empirical[{r.cell, r.period}] = r.aep;
  out << "cell,method,tail_probability,period,estimate,empirical\n";
  for (const ReportRow& r : rows) {
    if (r.method != Method::Gev && r.method != Method::Pot) continue;
    const auto it = empirical.find({r.cell, r.period});
    if (it == empirical.end() || !r.converged) continue;
    out << csv_escape(r.cell) << ',' << method_name(r.method) << ',' << tail_text(r) << ','
        << format_number(r.period) << ',' << format_number(r.aep) << ','
        << format_number(it->second) << "\n";
  }
}

void write_stability(std::ostream& out, const std::vector<ReportRow>& rows,
                     double reference_tail_probability) {
  std::map<std::pair<std::string, double>, const ReportRow*> ref;
  for (const ReportRow& r : rows)
    if (r.method == Method::Pot && r.converged && r.tail_probability &&
        *r.tail_probability == reference_tail_probability)
      ref[{r.cell, r.period}] = &r;
  out << "cell,tail_probability,n_used,period,xi,xi_reference,aep,aep_reference,aep_ratio\n";
  for (const ReportRow& r : rows) {
    if (r.method != Method::Pot || !r.converged) continue;
    const auto it = ref.find({r.cell, r.period});
    if (it == ref.end()) continue;
    const ReportRow& b = *it->second;
    out << csv_escape(r.cell) << ',' << tail_text(r) << ',' << r.n_used << ','
        << format_number(r.period) << ',' << format_number(r.xi) << ',' << format_number(b.xi)
        << ',' << format_number(r.aep) << ',' << format_number(b.aep) << ','
        << format_number(r.aep / b.aep) << "\n";
  }
}

void write_seasonal_vs_full_year(std::ostream& out, const std::vector<ReportRow>& rows) {
  std::map<JoinKey, double> full;
  for (const ReportRow& r : rows)
    if (r.method == Method::Pot && r.converged && r.tail_probability)
      full[{r.cell, *r.tail_probability, r.period}] = r.aep;
  out << "cell,approach,tail_probability,period,full_year,seasonal,season\n";
  for (const ReportRow& r : rows) {
    if ((r.method != Method::Seasonal1 && r.method != Method::Seasonal2) || !r.converged ||
        !r.tail_probability)
      continue;
    const auto it = full.find({r.cell, *r.tail_probability, r.period});
    if (it == full.end()) continue;
    out << csv_escape(r.cell) << ',' << (r.method == Method::Seasonal1 ? 1 : 2) << ','
        << tail_text(r) << ',' << format_number(r.period) << ',' << format_number(it->second)
        << ',' << format_number(r.aep) << ',' << r.season << "\n";
  }
}

void write_uncertainty_vs_shape(std::ostream& out, const std::vector<ReportRow>& rows,
                                double reference_tail_probability) {
  out << "cell,period,xi,se_xi,aep,aep_se,relative_uncertainty\n";
  for (const ReportRow& r : rows) {
    if (r.method != Method::Pot || !r.converged || !r.tail_probability ||
        *r.tail_probability != reference_tail_probability)
      continue;
    out << csv_escape(r.cell) << ',' << format_number(r.period) << ',' << format_number(r.xi)
        << ',' << format_number(r.se_xi) << ',' << format_number(r.aep) << ','
        << format_number(r.aep_se) << ',' << format_number(r.relative_uncertainty) << "\n";
  }
}

}  // namespace eva
