#pragma once
// Result rows, CSV/JSON serialization and atomic file output for the
// experiment runner.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace radonlab::lab {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// info and fitted rows never carry a pass flag; le / eq rows do.
enum class Check { info, fitted, le, eq };

inline std::string to_string(Check c) {
  switch (c) {
    case Check::info: return "info";
    case Check::fitted: return "fitted";
    case Check::le: return "le";
    case Check::eq: return "eq";
  }
  return "info";
}

inline Check parse_check(const std::string& s) {
  if (s == "info") return Check::info;
  if (s == "fitted") return Check::fitted;
  if (s == "le") return Check::le;
  if (s == "eq") return Check::eq;
  throw std::invalid_argument("unknown check kind '" + s + "'");
}

inline bool is_exact(Check c) { return c == Check::le || c == Check::eq; }

using Params = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip decimal; non-finite values become inf / -inf / nan.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

struct ResultRow {
  std::string experiment;
  std::string metric;
  Params params;
  double observed = 0.0;
  std::optional<double> bound;
  std::optional<double> ratio;
  Check check = Check::info;
  double tolerance = 0.0;
  std::optional<double> wall_time;

  /// Recomputed from observed / bound / tolerance only.
  std::optional<bool> pass() const {
    if (!is_exact(check)) return std::nullopt;
    if (!bound || std::isnan(observed) || std::isnan(*bound)) return false;
    if (check == Check::le) return observed <= *bound + tolerance;
    return std::abs(observed - *bound) <= tolerance;
  }

  std::string params_string() const {
    std::string s;
    for (const auto& [k, v] : params) s += (s.empty() ? "" : ";") + k + "=" + v;
    return s;
  }

  /// experiment | metric | params, the identity used when comparing runs
  std::string key() const { return experiment + " | " + metric + " | " + params_string(); }
};

inline Params parse_params(const std::string& s) {
  Params p;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto end = s.find(';', pos);
    if (end == std::string::npos) end = s.size();
    auto item = s.substr(pos, end - pos);
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed parameter '" + item + "'");
    p.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    pos = end + 1;
  }
  return p;
}

struct ResultSet {
  int schema_version = kSchemaVersion;
  std::string experiment;
  std::uint64_t seed = 0;
  json config = json::object();  // resolved parameters
  std::vector<ResultRow> rows;
  bool truncated = false;
  std::string truncation_reason;
  json attachments = json::object();  // JSON-only extras (e.g. member lists)

  bool exact_failures() const {
    for (const auto& r : rows)
      if (r.pass() == std::optional<bool>(false)) return true;
    return false;
  }
  const ResultRow* find(const std::string& metric, const Params& params = {}) const {
    for (const auto& r : rows)
      if (r.metric == metric && (params.empty() || r.params == params)) return &r;
    return nullptr;
  }
  std::vector<const ResultRow*> all(const std::string& metric) const {
    std::vector<const ResultRow*> out;
    for (const auto& r : rows)
      if (r.metric == metric) out.push_back(&r);
    return out;
  }
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline const std::vector<std::string>& csv_columns(bool timing) {
  static const std::vector<std::string> base{"schema_version", "experiment", "seed", "metric", "params", "observed", "bound",
                                             "ratio", "check", "tolerance", "pass"};
  static const std::vector<std::string> timed = [] {
    auto c = base;
    c.push_back("wall_time");
    return c;
  }();
  return timing ? timed : base;
}

inline std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

inline std::string pass_string(const ResultRow& r) {
  auto p = r.pass();
  return p ? (*p ? "true" : "false") : "";
}

/// Truncated runs end with a marker row (metric "truncated").
inline std::string to_csv(const ResultSet& rs, bool timing = false) {
  std::ostringstream os;
  const auto& cols = csv_columns(timing);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\r\n";
  auto emit = [&](const ResultRow& r) {
    std::vector<std::string> f{std::to_string(rs.schema_version), r.experiment, std::to_string(rs.seed), r.metric, r.params_string(), format_number(r.observed),
                               opt_number(r.bound), opt_number(r.ratio), to_string(r.check), format_number(r.tolerance), pass_string(r)};
    if (timing) f.push_back(opt_number(r.wall_time));
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << csv_field(f[i]);
    os << "\r\n";
  };
  for (const auto& r : rs.rows) emit(r);
  if (rs.truncated) emit(ResultRow{rs.experiment, "truncated", {{"reason", rs.truncation_reason}}, 1.0, std::nullopt, std::nullopt, Check::info, 0.0, std::nullopt});
  return os.str();
}

/// RFC-4180 records; quoted fields may contain separators and line breaks.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        out.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json number_json(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return v;
}

inline json opt_json(const std::optional<double>& v) { return v ? number_json(*v) : json(nullptr); }

inline json row_to_json(const ResultRow& r, bool timing) {
  json j;
  j["experiment"] = r.experiment;
  j["metric"] = r.metric;
  json p = json::object();
  for (const auto& [k, v] : r.params) p[k] = v;
  j["params"] = std::move(p);
  j["observed"] = number_json(r.observed);
  j["bound"] = opt_json(r.bound);
  j["ratio"] = opt_json(r.ratio);
  j["check"] = to_string(r.check);
  j["tolerance"] = number_json(r.tolerance);
  auto ps = r.pass();
  j["pass"] = ps ? json(*ps) : json(nullptr);
  if (timing) j["wall_time"] = opt_json(r.wall_time);
  return j;
}

inline json to_json(const ResultSet& rs, bool timing = false) {
  json j;
  j["schema_version"] = rs.schema_version;
  j["experiment"] = rs.experiment;
  j["seed"] = rs.seed;
  j["config"] = rs.config;
  j["truncated"] = rs.truncated;
  j["truncation_reason"] = rs.truncated ? json(rs.truncation_reason) : json(nullptr);
  json rows = json::array();
  for (const auto& r : rs.rows) rows.push_back(row_to_json(r, timing));
  j["rows"] = std::move(rows);
  if (!rs.attachments.empty()) j["attachments"] = rs.attachments;
  return j;
}

inline double json_number(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_number(v.get<std::string>());
  throw std::invalid_argument(where + ": expected a number");
}

inline std::optional<double> json_opt_number(const json& v, const std::string& where) {
  if (v.is_null()) return std::nullopt;
  return json_number(v, where);
}

inline ResultRow row_from_json(const json& j, const std::string& where) {
  for (const char* f : {"experiment", "metric", "params", "observed", "bound", "ratio", "check", "tolerance", "pass"})
    if (!j.contains(f)) throw std::invalid_argument(where + ": missing field '" + f + "'");
  ResultRow r;
  r.experiment = j.at("experiment").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  for (const auto& [k, v] : j.at("params").items()) r.params.emplace_back(k, v.get<std::string>());
  const std::string id = where + " (" + r.key() + ")";
  r.observed = json_number(j.at("observed"), id);
  r.bound = json_opt_number(j.at("bound"), id);
  r.ratio = json_opt_number(j.at("ratio"), id);
  r.check = parse_check(j.at("check").get<std::string>());
  r.tolerance = json_number(j.at("tolerance"), id);
  if (j.contains("wall_time")) r.wall_time = json_opt_number(j.at("wall_time"), id);
  auto stored = j.at("pass");
  std::optional<bool> s = stored.is_null() ? std::nullopt : std::optional<bool>(stored.get<bool>());
  if (s != r.pass()) throw std::invalid_argument(id + ": stored pass flag disagrees with observed/bound/tolerance");
  return r;
}

inline ResultSet from_json(const json& j) {
  if (!j.contains("schema_version") || j.at("schema_version") != kSchemaVersion)
    throw std::invalid_argument("result document: unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  ResultSet rs;
  rs.experiment = j.at("experiment").get<std::string>();
  rs.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("config")) rs.config = j.at("config");
  rs.truncated = j.value("truncated", false);
  if (rs.truncated) rs.truncation_reason = j.at("truncation_reason").get<std::string>();
  std::size_t i = 0;
  for (const auto& row : j.at("rows")) rs.rows.push_back(row_from_json(row, rs.experiment + " row " + std::to_string(i++)));
  if (j.contains("attachments")) rs.attachments = j.at("attachments");
  return rs;
}

/// CSV holds a single experiment and a single seed.
inline ResultSet from_csv(const std::string& text) {
  auto recs = parse_csv(text);
  if (recs.empty()) throw std::invalid_argument("csv: empty document");
  const auto& head = recs.front();
  bool timing = head == csv_columns(true);
  if (!timing && head != csv_columns(false)) throw std::invalid_argument("csv: header does not match schema version " + std::to_string(kSchemaVersion));
  ResultSet rs;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const auto& f = recs[i];
    const std::string where = "csv row " + std::to_string(i);
    if (f.size() != head.size()) throw std::invalid_argument(where + ": expected " + std::to_string(head.size()) + " fields");
    if (f[0] != std::to_string(kSchemaVersion)) throw std::invalid_argument(where + ": schema_version " + f[0] + " differs");
    ResultRow r;
    r.experiment = f[1];
    r.metric = f[3];
    r.params = parse_params(f[4]);
    const std::string id = where + " (" + r.key() + ")";
    try {
      std::uint64_t seed = 0;
      auto [end, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), seed);
      if (ec != std::errc() || end != f[2].data() + f[2].size()) throw std::invalid_argument("bad seed '" + f[2] + "'");
      if (i > 1 && seed != rs.seed) throw std::invalid_argument("seed differs from earlier rows");
      rs.seed = seed;
      r.observed = parse_number(f[5]);
      if (!f[6].empty()) r.bound = parse_number(f[6]);
      if (!f[7].empty()) r.ratio = parse_number(f[7]);
      r.check = parse_check(f[8]);
      r.tolerance = parse_number(f[9]);
      if (timing && !f[11].empty()) r.wall_time = parse_number(f[11]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(id + ": " + e.what());
    }
    if (pass_string(r) != f[10]) throw std::invalid_argument(id + ": stored pass flag disagrees with observed/bound/tolerance");
    rs.experiment = r.experiment;
    if (r.metric == "truncated") {
      rs.truncated = true;
      for (const auto& [k, v] : r.params)
        if (k == "reason") rs.truncation_reason = v;
      continue;
    }
    rs.rows.push_back(std::move(r));
  }
  return rs;
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

/// Write to a sibling temporary and rename over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// .csv or .json, chosen by extension.
inline std::vector<ResultSet> load_results(const std::filesystem::path& path) {
  auto text = read_file(path);
  if (path.extension() == ".csv") return {from_csv(text)};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  std::vector<ResultSet> out;
  if (j.is_array())
    for (const auto& d : j) out.push_back(from_json(d));
  else
    out.push_back(from_json(j));
  return out;
}

}  // namespace radonlab::lab
