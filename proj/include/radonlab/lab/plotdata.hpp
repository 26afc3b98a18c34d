#pragma once
// Whitespace-delimited plot data plus a JSON manifest; no plotting here.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radonlab/lab/results.hpp"

namespace radonlab::lab {

struct Axis {
  std::string label;
  std::string scale;  // "linear" or "log"
};

struct Figure {
  std::string name;
  std::string experiment;
  std::string title;
  Axis x, y;
  std::string reference;  // description of the yref column, empty if none
  std::vector<std::array<double, 3>> points;  // x, y, yref (nan when absent)
};

namespace detail {

inline std::optional<double> param_number(const ResultRow& r, const std::string& key) {
  for (const auto& [k, v] : r.params)
    if (k == key) return parse_number(v);
  return std::nullopt;
}

inline Figure series(const ResultSet& rs, const std::string& name, const std::string& title, const std::string& metric,
                     const std::string& xkey, Axis x, Axis y, const Params& filter = {}) {
  Figure f{name, rs.experiment, title, std::move(x), std::move(y), "", {}};
  for (const auto& r : rs.rows) {
    if (r.metric != metric) continue;
    bool keep = true;
    for (const auto& kv : filter) keep = keep && std::find(r.params.begin(), r.params.end(), kv) != r.params.end();
    auto xv = param_number(r, xkey);
    if (keep && xv) f.points.push_back({*xv, r.observed, NAN});
  }
  std::sort(f.points.begin(), f.points.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
  return f;
}

/// yref = c r / (r - 2) with c the fitted constant of the same p
inline void growth_reference(Figure& f, double c) {
  f.reference = "c*r/(r-2), c = " + format_number(c);
  for (auto& p : f.points) p[2] = c * p[0] / (p[0] - 2);
}

inline void power_reference(Figure& f, double exponent, const std::string& label) {
  f.reference = label;
  for (auto& p : f.points) p[2] = std::pow(p[0], exponent);
}

}  // namespace detail

/// Figures derivable from one result set.
inline std::vector<Figure> figures_for(const ResultSet& rs) {
  using detail::series;
  std::vector<Figure> out;
  const std::string& e = rs.experiment;
  if (e == "gauss-scan") {
    auto f = series(rs, "gauss-scan", "max |G(a/q)| over reduced a", "max_abs_gauss", "q", {"q", "log"}, {"max |G|", "log"});
    detail::power_reference(f, -0.5, "q^(-1/2)");
    out.push_back(std::move(f));
  } else if (e == "weyl-decay") {
    out.push_back(series(rs, "weyl-decay", "normalized Weyl sums", "normalized_weyl_sum", "N", {"N", "log"}, {"|S_N| / N^k", "log"}));
  } else if (e == "prop0-fit" || e == "prop2-fit") {
    const bool sing = e == "prop2-fit";
    const std::string metric = sing ? "psi_difference_abs" : "phi_abs";
    auto f = series(rs, e + "-decay", sing ? "|Psi_N - Psi_{N/2}| against |N^A xi|" : "|Phi_N| against |N^A xi|", metric, "norm",
                    {"|N^A xi|_inf", "log"}, {sing ? "|Psi_N - Psi_{N/2}|" : "|Phi_N|", "log"});
    double d = 2;
    if (auto* s = rs.find(sing ? "psi_decay_slope" : "phi_decay_slope")) d = detail::param_number(*s, "d").value_or(2.0);
    detail::power_reference(f, -1.0 / d, "x^(-1/" + format_number(d) + ")");
    out.push_back(std::move(f));
    out.push_back(series(rs, e + "-exact", "error * N / q at xi = a/q", "exact_scaled_error", "N", {"N", "log"}, {"max error * N / q", "linear"}));
  } else if (e == "lepingle" || e == "operator-norm") {
    std::map<double, double> fitted;
    for (const auto* r : rs.all("fitted_constant")) fitted[detail::param_number(*r, "p").value_or(NAN)] = r->observed;
    for (const auto& [p, c] : fitted) {
      auto f = series(rs, e + "-p" + format_number(p), "max ||V_r|| / ||f|| at p = " + format_number(p), "max_ratio", "r", {"r", "linear"},
                      {"ratio", "log"}, {{"p", format_number(p)}});
      detail::growth_reference(f, c);
      out.push_back(std::move(f));
    }
  } else if (e == "good-lambda") {
    out.push_back(series(rs, "good-lambda", "good-lambda ratio", "max_ratio", "lambda", {"lambda", "log"}, {"lhs / rhs", "linear"}));
  } else if (e == "iw-build") {
    out.push_back(series(rs, "iw-build", "|P_N|", "members", "N", {"N", "linear"}, {"members", "log"}));
  } else if (e == "vr-suite") {
    out.push_back(series(rs, "vr-suite", "dp vs brute force at r = 2", "dp_vs_bruteforce_rel_error", "n", {"n", "linear"},
                         {"max relative error", "linear"}, {{"r", "2"}}));
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const Figure& f) { return f.points.empty(); }), out.end());
  return out;
}

struct PlotOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

inline std::string figure_data(const Figure& f) {
  std::ostringstream os;
  bool ref = !f.reference.empty();
  os << "# " << f.title << "\n# x y" << (ref ? " yref" : "") << "\n";
  for (const auto& p : f.points) {
    os << format_number(p[0]) << ' ' << format_number(p[1]);
    if (ref) os << ' ' << format_number(p[2]);
    os << '\n';
  }
  return os.str();
}

/// Selection entries match figure names or experiment ids; "all" takes
/// everything. Nothing selected means no files and a warning.
inline PlotOutput emit_plotdata(const std::vector<ResultSet>& sets, const std::vector<std::string>& selection,
                                const std::filesystem::path& dir) {
  PlotOutput out;
  std::vector<Figure> chosen;
  const bool all = std::find(selection.begin(), selection.end(), "all") != selection.end();
  for (const auto& rs : sets)
    for (auto& f : figures_for(rs)) {
      bool take = all || std::find(selection.begin(), selection.end(), f.name) != selection.end() ||
                  std::find(selection.begin(), selection.end(), f.experiment) != selection.end();
      if (take) chosen.push_back(std::move(f));
    }
  if (chosen.empty()) {
    out.warnings.push_back(selection.empty() ? "empty selection: no plot data written" : "selection matched no figures: no plot data written");
    return out;
  }
  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  json figs = json::array();
  for (const auto& f : chosen) {
    auto path = dir / (f.name + ".dat");
    write_atomic(path, figure_data(f));
    out.files.push_back(path);
    json m;
    m["name"] = f.name;
    m["experiment"] = f.experiment;
    m["file"] = f.name + ".dat";
    m["title"] = f.title;
    m["x"] = {{"label", f.x.label}, {"scale", f.x.scale}};
    m["y"] = {{"label", f.y.label}, {"scale", f.y.scale}};
    m["columns"] = f.reference.empty() ? json::array({"x", "y"}) : json::array({"x", "y", "yref"});
    m["reference"] = f.reference.empty() ? json(nullptr) : json(f.reference);
    figs.push_back(std::move(m));
  }
  manifest["figures"] = std::move(figs);
  auto mpath = dir / "manifest.json";
  write_atomic(mpath, manifest.dump(2) + "\n");
  out.files.push_back(mpath);
  return out;
}

}  // namespace radonlab::lab
