#pragma once
// Run-over-run comparison of result sets.

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "radonlab/lab/results.hpp"

namespace radonlab::lab {

inline constexpr double kDriftThreshold = 0.05;

struct ReportEntry {
  std::string key;
  std::string experiment;
  std::string metric;
  std::string params;
  Check check = Check::info;
  double previous = 0.0;
  double current = 0.0;
  std::optional<bool> previous_pass;
  std::optional<bool> current_pass;
  double drift = 0.0;  // relative change of the observed value
  std::string flag;  // "", "drift" or "pass-flip"
};

struct Report {
  std::vector<ReportEntry> fitted;  // every fitted row present in both runs
  std::vector<ReportEntry> flagged;
  std::vector<std::string> added;  // experiment ids, then row keys
  std::vector<std::string> removed;

  bool empty() const { return flagged.empty() && added.empty() && removed.empty(); }
};

inline double relative_drift(double prev, double cur) {
  if (prev == cur) return 0.0;
  if (!std::isfinite(prev) || !std::isfinite(cur)) return INFINITY;
  double scale = std::abs(prev);
  return scale > 0 ? std::abs(cur - prev) / scale : INFINITY;
}

namespace detail {

inline std::map<std::string, const ResultRow*> index_rows(const ResultSet& rs, const std::string& side) {
  std::map<std::string, const ResultRow*> m;
  for (const auto& r : rs.rows)
    if (!m.emplace(r.key(), &r).second) throw std::invalid_argument(side + ": duplicate row '" + r.key() + "'");
  return m;
}

}  // namespace detail

inline Report compare(const std::vector<ResultSet>& previous, const std::vector<ResultSet>& current) {
  std::map<std::string, const ResultSet*> prev, cur;
  for (const auto& s : previous) prev[s.experiment] = &s;
  for (const auto& s : current) cur[s.experiment] = &s;
  Report rep;
  for (const auto& [id, s] : cur)
    if (!prev.count(id)) rep.added.push_back("experiment " + id);
  for (const auto& [id, s] : prev)
    if (!cur.count(id)) rep.removed.push_back("experiment " + id);
  for (const auto& [id, ps] : prev) {
    auto it = cur.find(id);
    if (it == cur.end()) continue;
    const ResultSet& cs = *it->second;
    if (ps->schema_version != cs.schema_version)
      throw std::invalid_argument(id + ": schema_version " + std::to_string(ps->schema_version) + " vs " + std::to_string(cs.schema_version));
    auto pi = detail::index_rows(*ps, "previous"), ci = detail::index_rows(cs, "current");
    for (const auto& [key, c] : ci)
      if (!pi.count(key)) rep.added.push_back(key);
    for (const auto& [key, p] : pi) {
      auto cj = ci.find(key);
      if (cj == ci.end()) {
        rep.removed.push_back(key);
        continue;
      }
      const ResultRow& c = *cj->second;
      if (p->check != c.check)
        throw std::invalid_argument("schema mismatch in row '" + key + "': check kind " + to_string(p->check) + " vs " + to_string(c.check));
      ReportEntry e{key, p->experiment, p->metric, p->params_string(), p->check, p->observed, c.observed, p->pass(), c.pass(),
                    relative_drift(p->observed, c.observed), ""};
      if (is_exact(p->check) && e.previous_pass != e.current_pass) e.flag = "pass-flip";
      if (p->check == Check::fitted && e.drift > kDriftThreshold) e.flag = "drift";
      if (p->check == Check::fitted) rep.fitted.push_back(e);
      if (!e.flag.empty()) rep.flagged.push_back(e);
    }
  }
  return rep;
}

inline std::string pass_word(const std::optional<bool>& p) { return p ? (*p ? "pass" : "FAIL") : "-"; }

inline std::string to_markdown(const Report& rep) {
  std::ostringstream os;
  os << "# Result comparison\n\n";
  if (rep.empty()) os << "No differences.\n\n";
  if (!rep.flagged.empty()) {
    os << "## Flagged\n\n| experiment | metric | params | previous | current | drift | flag |\n|---|---|---|---|---|---|---|\n";
    for (const auto& e : rep.flagged) {
      bool flip = e.flag == "pass-flip";
      os << "| " << e.experiment << " | " << e.metric << " | " << e.params << " | " << (flip ? pass_word(e.previous_pass) : format_number(e.previous)) << " | "
         << (flip ? pass_word(e.current_pass) : format_number(e.current)) << " | " << format_number(e.drift) << " | " << e.flag << " |\n";
    }
    os << "\n";
  }
  auto list = [&](const char* title, const std::vector<std::string>& v) {
    if (v.empty()) return;
    os << "## " << title << "\n\n";
    for (const auto& s : v) os << "- " << s << "\n";
    os << "\n";
  };
  list("Added", rep.added);
  list("Removed", rep.removed);
  if (!rep.fitted.empty()) {
    os << "## Fitted values\n\n| experiment | metric | params | previous | current | drift |\n|---|---|---|---|---|---|\n";
    for (const auto& e : rep.fitted)
      os << "| " << e.experiment << " | " << e.metric << " | " << e.params << " | " << format_number(e.previous) << " | " << format_number(e.current) << " | " << format_number(e.drift) << " |\n";
  }
  return os.str();
}

inline json to_json(const ReportEntry& e) {
  json j;
  j["experiment"] = e.experiment;
  j["metric"] = e.metric;
  j["params"] = e.params;
  j["check"] = to_string(e.check);
  j["previous"] = number_json(e.previous);
  j["current"] = number_json(e.current);
  j["previous_pass"] = e.previous_pass ? json(*e.previous_pass) : json(nullptr);
  j["current_pass"] = e.current_pass ? json(*e.current_pass) : json(nullptr);
  j["drift"] = number_json(e.drift);
  j["flag"] = e.flag;
  return j;
}

inline json to_json(const Report& rep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["drift_threshold"] = kDriftThreshold;
  json f = json::array(), g = json::array();
  for (const auto& e : rep.flagged) f.push_back(to_json(e));
  for (const auto& e : rep.fitted) g.push_back(to_json(e));
  j["flagged"] = std::move(f);
  j["added"] = rep.added;
  j["removed"] = rep.removed;
  j["fitted"] = std::move(g);
  return j;
}

}  // namespace radonlab::lab
