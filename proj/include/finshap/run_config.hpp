#pragma once

#include <optional>
#include <string>

#include "finshap/pipeline.hpp"
#include "finshap/synthetic.hpp"

namespace finshap {

struct CsvSource {
  std::string panel_path;
  std::string schema_path;
  std::string ratios_path;  // empty = built-in default ratio set
};

// Everything a run needs; echoed verbatim into the output directory so any
// run can be reproduced from its artifacts.
struct RunConfig {
  std::uint64_t seed = 7;
  std::string out = "run_out";
  std::size_t workers = 0;  // 0 = hardware concurrency

  std::optional<GeneratorConfig> synthetic = GeneratorConfig{};
  std::optional<CsvSource> csv;

  std::string roi_feature = kRoiFeature;
  int train_last_year = 2020;
  int test_year = 2021;

  ModelHyper model;
  ExplainConfig explain;

  std::size_t ranking_k = 50;     // per-instance Top-k list length for rankings
  std::size_t group_hist_k = 10;  // Top-k for the per-part frequency histogram
  std::size_t n_top = 50;
  std::size_t n_worst = 50;
  std::size_t n_bins = 0;  // 0 = one bin per feature position

  std::size_t keep_top_n = 100;
  std::size_t drop_bottom_m = 100;

  std::size_t effective_workers() const { return workers == 0 ? default_workers() : workers; }

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace finshap
