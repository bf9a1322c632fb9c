#pragma once

#include <string>
#include <vector>

#include "finshap/run_config.hpp"

namespace finshap {

// Paths written, relative to config.out; config.json always comes first.
using ArtifactList = std::vector<std::string>;

// panel.csv + schema.json + truth.json + ratios.json for a synthetic panel.
ArtifactList cmd_synthesize(const RunConfig& config);

// Table-1-shaped grid: {4 model kinds} x {raw, ratios} x {accuracy, roc-auc}.
ArtifactList cmd_train_eval(const RunConfig& config);

// Attributions plus Top-k rankings, the per-part frequency histogram and the
// positional distribution (or per-part values for the partition estimator).
ArtifactList cmd_explain(const RunConfig& config);

// Table-2-shaped report: all/top-n/minus-bottom-m accuracies, with per-class
// ranking variants. Reuses rankings already present in the output directory.
ArtifactList cmd_validate(const RunConfig& config);

}  // namespace finshap
