#pragma once
// Experiment runner: config -> run -> CSV/JSON files.

#include <filesystem>
#include <vector>

#include "radonlab/lab/config.hpp"
#include "radonlab/lab/experiments.hpp"
#include "radonlab/lab/plotdata.hpp"
#include "radonlab/lab/report.hpp"
#include "radonlab/lab/results.hpp"

namespace radonlab::lab {

/// <out_dir>/<experiment>.csv and/or .json, each written atomically.
inline std::vector<std::filesystem::path> write_outputs(const ResultSet& rs, const ExperimentConfig& cfg) {
  std::vector<std::filesystem::path> paths;
  const std::filesystem::path dir(cfg.out_dir);
  if (cfg.format != Format::json) {
    paths.push_back(dir / (rs.experiment + ".csv"));
    write_atomic(paths.back(), to_csv(rs, cfg.timing));
  }
  if (cfg.format != Format::csv) {
    paths.push_back(dir / (rs.experiment + ".json"));
    write_atomic(paths.back(), to_json(rs, cfg.timing).dump(2) + "\n");
  }
  return paths;
}

}  // namespace radonlab::lab
