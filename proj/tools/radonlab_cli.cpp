// radonlab: command-line front end for the experiment runner.
//
//   radonlab <experiment> [--config F] [--seed S] [--out DIR] [--threads N] [--format csv|json|both] [params...]
//   radonlab run --config F
//   radonlab report PREVIOUS CURRENT [--markdown F] [--json F]
//   radonlab plot RESULT... [--select NAME...] --out DIR
//   radonlab list
//
// Exit status: 0 all exact checks pass, 1 an exact check failed (or report
// found differences), 2 bad configuration or usage, 3 runtime error.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radonlab/lab/lab.hpp"

namespace lab = radonlab::lab;
using lab::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::string> format;
  bool timing = false;
  std::optional<double> max_lattice_points, max_set_size, max_seconds;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* o = sub->add_option("--config", c.config, "JSON config file (schema: configs/README.md)");
  if (config_required) o->required();
  o->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "RNG seed (default 0 without a config file)");
  sub->add_option("--out", c.out, "output directory (env LAB_OUT)");
  sub->add_option("--threads", c.threads, "worker threads (env LAB_THREADS)")->check(CLI::PositiveNumber);
  sub->add_option("--format", c.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
  sub->add_flag("--timing", c.timing, "add a wall_time column (output is then not reproducible)");
  sub->add_option("--max-lattice-points", c.max_lattice_points, "budget on lattice points per evaluation");
  sub->add_option("--max-set-size", c.max_set_size, "budget on constructed set sizes");
  sub->add_option("--max-seconds", c.max_seconds, "wall-clock budget; overruns keep partial rows");
}

json parse_flag_value(const lab::ParamSpec& p, const std::string& raw) {
  const std::string where = "--" + lab::flag_name(p.name);
  try {
    switch (p.kind) {
      case lab::ParamKind::integer: {
        std::size_t used = 0;
        long v = std::stol(raw, &used);
        if (used != raw.size()) throw std::invalid_argument("trailing characters");
        return v;
      }
      case lab::ParamKind::number:
        return lab::parse_number(raw);
      case lab::ParamKind::numbers: {
        json a = json::array();
        std::size_t pos = 0;
        while (pos <= raw.size()) {
          auto end = raw.find(',', pos);
          if (end == std::string::npos) end = raw.size();
          a.push_back(lab::parse_number(raw.substr(pos, end - pos)));
          pos = end + 1;
        }
        return a;
      }
      case lab::ParamKind::text:
        return raw;
      case lab::ParamKind::object:
        return json::parse(raw);
    }
  } catch (const std::exception& e) {
    throw lab::config_error(where + ": cannot parse '" + raw + "' (" + e.what() + ")");
  }
  return raw;
}

/// Layering: config file, then LAB_OUT / LAB_THREADS, then flags.
std::vector<lab::ExperimentConfig> build_configs(const Common& c, const std::string& experiment, const json& overrides) {
  std::vector<lab::ExperimentConfig> cfgs;
  if (!c.config.empty()) {
    auto all = lab::parse_config(lab::read_file(c.config), c.config);
    for (auto& cfg : all)
      if (experiment.empty() || cfg.experiment == experiment) cfgs.push_back(std::move(cfg));
    if (cfgs.empty()) throw lab::config_error(c.config + ": no entry for experiment '" + experiment + "'");
  } else {
    lab::ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.seed = 0;
    cfgs.push_back(std::move(cfg));
  }
  for (auto& cfg : cfgs) {
    lab::apply_environment(cfg);
    if (c.seed) cfg.seed = *c.seed;
    if (c.out) cfg.out_dir = *c.out;
    if (c.threads) cfg.threads = *c.threads;
    if (c.format) cfg.format = lab::parse_format(*c.format);
    if (c.timing) cfg.timing = true;
    if (c.max_lattice_points) cfg.budgets.max_lattice_points = *c.max_lattice_points;
    if (c.max_set_size) cfg.budgets.max_set_size = *c.max_set_size;
    if (c.max_seconds) cfg.budgets.max_seconds = *c.max_seconds;
    for (const auto& [k, v] : overrides.items()) cfg.params[k] = v;
    cfg.validate();
    lab::resolve_params(lab::find_experiment(cfg.experiment), cfg.params);
  }
  return cfgs;
}

int run_all(const std::vector<lab::ExperimentConfig>& cfgs) {
  int status = 0;
  for (const auto& cfg : cfgs) {
    auto rs = lab::run(cfg);
    auto paths = lab::write_outputs(rs, cfg);
    std::size_t exact = 0, failed = 0;
    for (const auto& r : rs.rows)
      if (auto p = r.pass()) {
        ++exact;
        if (!*p) {
          ++failed;
          std::cerr << "FAIL " << r.key() << ": observed " << lab::format_number(r.observed) << ", bound "
                    << lab::format_number(*r.bound) << "\n";
        }
      }
    std::cout << cfg.experiment << ": " << rs.rows.size() << " rows, " << exact << " exact checks, " << failed << " failed";
    for (const auto& p : paths) std::cout << "\n  wrote " << p.string();
    std::cout << "\n";
    if (rs.truncated) std::cerr << "warning: " << cfg.experiment << " truncated: " << rs.truncation_reason << "\n";
    if (failed) status = 1;
  }
  return status;
}

std::vector<lab::ResultSet> load_all(const std::vector<std::string>& paths) {
  std::vector<lab::ResultSet> out;
  for (const auto& p : paths) {
    std::filesystem::path path(p);
    if (std::filesystem::is_directory(path)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(path))
        if (e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files)
        for (auto& rs : lab::load_results(f)) out.push_back(std::move(rs));
    } else {
      for (auto& rs : lab::load_results(path)) out.push_back(std::move(rs));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Radon transform experiment runner"};
  app.require_subcommand(1);

  // one subcommand per experiment, with a flag per parameter
  std::map<std::string, Common> commons;
  std::map<std::string, std::map<std::string, std::string>> raw;
  for (const auto& info : lab::experiments()) {
    auto* sub = app.add_subcommand(info.name, info.summary);
    add_common(sub, commons[info.name], false);
    for (const auto& p : info.params) {
      std::string help = p.help + " (default " + p.fallback.dump() + ")";
      sub->add_option_function<std::string>("--" + lab::flag_name(p.name), [&raw, &info, &p](const std::string& v) { raw[info.name][p.name] = v; },
                                            help);
    }
  }

  Common run_common;
  auto* run = app.add_subcommand("run", "run every experiment listed in a config file");
  add_common(run, run_common, true);

  std::vector<std::string> report_in;
  std::string report_md, report_json;
  auto* report = app.add_subcommand("report", "compare two runs (files or directories of .json results)");
  report->add_option("previous", report_in, "previous and current results")->expected(2)->required();
  report->add_option("--markdown", report_md, "write the markdown diff here instead of stdout");
  report->add_option("--json", report_json, "also write the diff as JSON");

  std::vector<std::string> plot_in, plot_select{"all"};
  std::string plot_out = "plots";
  auto* plot = app.add_subcommand("plot", "write plot data files and a manifest from result files");
  plot->add_option("results", plot_in, "result files or directories")->required();
  plot->add_option("--select", plot_select, "figure names or experiment ids (default all)")->expected(0, -1);
  plot->add_option("--out", plot_out, "directory for the data files");

  auto* list = app.add_subcommand("list", "list experiments and their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      for (const auto& info : lab::experiments()) {
        std::cout << info.name << ": " << info.summary << "\n";
        for (const auto& p : info.params) std::cout << "  --" << lab::flag_name(p.name) << "  " << p.help << " (default " << p.fallback.dump() << ")\n";
      }
      return 0;
    }
    if (report->parsed()) {
      auto rep = lab::compare(load_all({report_in[0]}), load_all({report_in[1]}));
      auto md = lab::to_markdown(rep);
      if (report_md.empty())
        std::cout << md;
      else
        lab::write_atomic(report_md, md);
      if (!report_json.empty()) lab::write_atomic(report_json, lab::to_json(rep).dump(2) + "\n");
      return rep.empty() ? 0 : 1;
    }
    if (plot->parsed()) {
      auto res = lab::emit_plotdata(load_all(plot_in), plot_select, plot_out);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& f : res.files) std::cout << "wrote " << f.string() << "\n";
      return 0;
    }
    if (run->parsed()) return run_all(build_configs(run_common, "", json::object()));
    for (const auto& info : lab::experiments()) {
      if (!app.got_subcommand(info.name)) continue;
      json overrides = json::object();
      for (const auto& p : info.params)
        if (raw[info.name].count(p.name)) overrides[p.name] = parse_flag_value(p, raw[info.name][p.name]);
      return run_all(build_configs(commons[info.name], info.name, overrides));
    }
  } catch (const lab::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
