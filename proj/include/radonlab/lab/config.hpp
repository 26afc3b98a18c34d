#pragma once
// Experiment configuration: a JSON document, documented in configs/README.md.

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "radonlab/lab/results.hpp"

namespace radonlab::lab {

class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Format { csv, json, both };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  if (s == "both") return Format::both;
  throw config_error("format must be one of csv, json, both (got '" + s + "')");
}

struct Budgets {
  double max_lattice_points = 1e8;
  double max_set_size = 2e7;
  std::optional<double> max_seconds;
};

struct ExperimentConfig {
  std::string experiment;
  std::optional<std::uint64_t> seed;
  json params = json::object();
  Budgets budgets;
  std::string out_dir = "lab_out";
  Format format = Format::both;
  bool timing = false;
  unsigned threads = 1;

  /// Seed and budgets must be present and sane before anything runs.
  void validate() const {
    if (experiment.empty()) throw config_error("experiment id is missing");
    if (!seed) throw config_error(experiment + ": seed is mandatory");
    if (!(budgets.max_lattice_points > 0)) throw config_error("budgets.max_lattice_points must be positive");
    if (!(budgets.max_set_size > 0)) throw config_error("budgets.max_set_size must be positive");
    if (budgets.max_seconds && !(*budgets.max_seconds > 0)) throw config_error("budgets.max_seconds must be positive");
    if (threads == 0) throw config_error("threads must be positive");
    if (!params.is_object()) throw config_error(experiment + ": params must be an object");
  }
};

namespace detail {

inline void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw config_error(where + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) {
      std::string list;
      for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      throw config_error(where + ": unknown key '" + k + "' (expected one of: " + list + ")");
    }
  }
}

inline double positive_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw config_error(where + ": expected a number");
  double x = v.get<double>();
  if (!(x > 0)) throw config_error(where + ": must be positive");
  return x;
}

inline std::uint64_t parse_seed(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw config_error(where + ": seed must be a nonnegative integer");
}

inline unsigned parse_threads(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 1) throw config_error(where + ": threads must be a positive integer");
  return static_cast<unsigned>(v.get<long long>());
}

}  // namespace detail

/// Parses one config document into one entry per experiment. Shared keys
/// (seed, threads, output, budgets) apply to every entry.
inline std::vector<ExperimentConfig> parse_config(const std::string& text, const std::string& source = "config") {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    throw config_error(source + ": " + e.what());
  }
  detail::only_keys(doc, source, {"experiment", "experiments", "params", "seed", "threads", "output", "budgets"});
  ExperimentConfig base;
  if (!doc.contains("seed")) throw config_error(source + ": 'seed' is mandatory");
  base.seed = detail::parse_seed(doc.at("seed"), source + ".seed");
  if (doc.contains("threads")) base.threads = detail::parse_threads(doc.at("threads"), source + ".threads");
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    detail::only_keys(o, source + ".output", {"dir", "format", "timing"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) throw config_error(source + ".output.dir: expected a string");
      base.out_dir = o.at("dir").get<std::string>();
    }
    if (o.contains("format")) {
      if (!o.at("format").is_string()) throw config_error(source + ".output.format: expected a string");
      base.format = parse_format(o.at("format").get<std::string>());
    }
    if (o.contains("timing")) {
      if (!o.at("timing").is_boolean()) throw config_error(source + ".output.timing: expected true or false");
      base.timing = o.at("timing").get<bool>();
    }
  }
  if (doc.contains("budgets")) {
    const auto& b = doc.at("budgets");
    detail::only_keys(b, source + ".budgets", {"max_lattice_points", "max_set_size", "max_seconds"});
    if (b.contains("max_lattice_points")) base.budgets.max_lattice_points = detail::positive_number(b.at("max_lattice_points"), source + ".budgets.max_lattice_points");
    if (b.contains("max_set_size")) base.budgets.max_set_size = detail::positive_number(b.at("max_set_size"), source + ".budgets.max_set_size");
    if (b.contains("max_seconds")) base.budgets.max_seconds = detail::positive_number(b.at("max_seconds"), source + ".budgets.max_seconds");
  }

  std::vector<ExperimentConfig> out;
  auto add = [&](const json& id, const json* params, const std::string& where) {
    if (!id.is_string()) throw config_error(where + ".experiment: expected a string");
    ExperimentConfig c = base;
    c.experiment = id.get<std::string>();
    if (params) {
      if (!params->is_object()) throw config_error(where + ".params: expected an object");
      c.params = *params;
    }
    out.push_back(std::move(c));
  };
  if (doc.contains("experiment") == doc.contains("experiments"))
    throw config_error(source + ": exactly one of 'experiment' or 'experiments' is required");
  if (doc.contains("experiment")) {
    add(doc.at("experiment"), doc.contains("params") ? &doc.at("params") : nullptr, source);
  } else {
    if (doc.contains("params")) throw config_error(source + ": top-level 'params' is only valid with 'experiment'");
    const auto& list = doc.at("experiments");
    if (!list.is_array() || list.empty()) throw config_error(source + ".experiments: expected a nonempty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = source + ".experiments[" + std::to_string(i) + "]";
      detail::only_keys(list[i], where, {"experiment", "params"});
      if (!list[i].contains("experiment")) throw config_error(where + ": missing 'experiment'");
      add(list[i].at("experiment"), list[i].contains("params") ? &list[i].at("params") : nullptr, where);
    }
  }
  for (const auto& c : out) c.validate();
  return out;
}

/// LAB_OUT and LAB_THREADS override the file; command-line flags override both.
inline void apply_environment(ExperimentConfig& c) {
  if (const char* o = std::getenv("LAB_OUT"); o && *o) c.out_dir = o;
  if (const char* t = std::getenv("LAB_THREADS"); t && *t) {
    char* end = nullptr;
    long v = std::strtol(t, &end, 10);
    if (*end != '\0' || v < 1) throw config_error(std::string("LAB_THREADS must be a positive integer (got '") + t + "')");
    c.threads = static_cast<unsigned>(v);
  }
}

}  // namespace radonlab::lab
