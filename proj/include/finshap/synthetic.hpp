#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "finshap/dataset.hpp"

namespace finshap {

// Desk-scale stand-in for a proprietary statement panel: group-correlated
// feature draws and a latent ROI process driven by a sparse signal.
struct GeneratorConfig {
  std::size_t n_companies = 327;
  int year_first = 2013;
  int year_last = 2022;
  std::array<std::size_t, 4> group_sizes = {30, 120, 80, 71};
  std::size_t n_informative = 20;
  std::size_t n_interactions = 3;
  double noise_level = 0.8;
  double group_correlation = 0.3;
  // When set, the planted signal is confined to this group (0..3).
  std::optional<std::size_t> informative_group;

  std::size_t feature_count() const {
    return group_sizes[0] + group_sizes[1] + group_sizes[2] + group_sizes[3];
  }
};

struct SyntheticTruth {
  std::vector<std::size_t> informative_features;
  std::vector<double> weights;  // length F, zero exactly off the informative set
  std::vector<std::pair<std::size_t, std::size_t>> interaction_pairs;
  std::vector<double> interaction_weights;
  double bayes_auc = 0.0;  // simulated optimum of the generating process

  nlohmann::json to_json() const;
  static SyntheticTruth from_json(const nlohmann::json& doc);
};

struct SyntheticPanel {
  PanelDataset panel;
  SyntheticTruth truth;
};

// Name of the profitability feature every generated panel carries.
inline constexpr const char* kRoiFeature = "roi";

FeatureSchema synthetic_schema(const GeneratorConfig& config);

// Deterministic in seed: same seed, bit-identical panel.
SyntheticPanel synthesize_panel(const GeneratorConfig& config, std::uint64_t seed);

// Standard liquidity/leverage/profitability ratios over the canonical item
// names that synthetic_schema provides; editable for real exports.
RatioSpec default_ratio_spec();

}  // namespace finshap
