#pragma once

#include <array>
#include <string>
#include <vector>

#include "finshap/dataset.hpp"
#include "finshap/metrics.hpp"
#include "finshap/models.hpp"
#include "finshap/shapley.hpp"

namespace finshap {

enum class ClassScope { Class0, Class1, Both };
enum class RankDirection { Highest, Lowest };
enum class ValueMode { Signed, Absolute };

std::string to_string(ClassScope scope);
std::string to_string(RankDirection direction);
std::string to_string(ValueMode mode);

// Per-instance, per-column, per-class attribution values. Columns are
// features for the fine-grained estimators and document parts when the
// partition estimator produced the matrix.
class AttributionMatrix {
 public:
  AttributionMatrix() = default;
  AttributionMatrix(std::size_t n_instances, std::size_t n_columns)
      : n_(n_instances), m_(n_columns), values_(n_instances * n_columns * 2, 0.0) {}

  std::size_t instances() const { return n_; }
  std::size_t columns() const { return m_; }

  double at(std::size_t instance, std::size_t column, std::size_t cls) const {
    return values_[(instance * m_ + column) * 2 + cls];
  }
  double& at(std::size_t instance, std::size_t column, std::size_t cls) {
    return values_[(instance * m_ + column) * 2 + cls];
  }

  std::vector<std::string> column_names;
  std::vector<std::string> instance_ids;
  bool group_level = false;
  AttributionMethod method = AttributionMethod::Kernel;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> evaluations;  // per instance, both classes

  nlohmann::json to_json() const;
  static AttributionMatrix from_json(const nlohmann::json& doc);

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> values_;
};

struct ExplainConfig {
  AttributionMethod method = AttributionMethod::Kernel;
  std::int64_t kernel_budget = 0;  // 0 = 2M + 2048 evaluations; kAllCoalitions = full
  std::size_t n_permutations = 2000;
  double regularization = 1e-10;
  std::size_t background_size = 100;
  BaselineMode baseline = BaselineMode::MeanBackground;
  std::size_t exact_cap = 20;

  std::int64_t effective_kernel_budget(std::size_t n_features) const {
    return kernel_budget == 0 ? static_cast<std::int64_t>(2 * n_features + 2048) : kernel_budget;
  }
};

// Partition of feature positions into the schema's document parts.
Partition schema_partition(const FeatureSchema& schema);

// One masking game per test instance and class; per-instance sub-seeds derive
// from the root seed by index, so results are independent of worker count.
AttributionMatrix explain_dataset(const Model& model, const LabeledDataset& test,
                                  const Matrix& background, const ExplainConfig& config,
                                  std::uint64_t seed, std::size_t workers = 1);

// How often each column lands in the per-instance top-k list. The derived
// rank order sorts by count descending, feature position ascending.
struct RankingReport {
  std::vector<std::uint64_t> counts;
  std::vector<std::size_t> rank_order;
  std::vector<std::string> column_names;
  std::size_t k = 0;
  ClassScope scope = ClassScope::Both;
  RankDirection direction = RankDirection::Highest;
  ValueMode mode = ValueMode::Signed;
  std::size_t n_instances = 0;

  nlohmann::json to_json() const;
  static RankingReport from_json(const nlohmann::json& doc);
};

// Scope Both ranks by attribution magnitude across the two classes (the two
// are mirror images for binary models); single-class scopes use the signed
// value unless mode says otherwise.
RankingReport rank_by_topk_frequency(const AttributionMatrix& attr, std::size_t k,
                                     ClassScope scope, RankDirection direction,
                                     ValueMode mode = ValueMode::Signed);

RankingReport per_class_ranking(const AttributionMatrix& attr, std::size_t k, int class_id,
                                RankDirection direction = RankDirection::Highest);

// Top-k appearances per document part, normalized by group size and instance
// count.
struct GroupFrequencyHistogram {
  std::array<double, kFeatureGroupCount> frequency = {};
  std::array<std::size_t, kFeatureGroupCount> group_sizes = {};
  std::size_t k = 0;
  std::size_t n_instances = 0;

  std::string to_csv() const;
};

GroupFrequencyHistogram group_frequency_histogram(const AttributionMatrix& attr,
                                                  const FeatureSchema& schema, std::size_t k = 10,
                                                  ClassScope scope = ClassScope::Both);

// Position-binned appearance counts of the per-instance most and least
// important features; plot-ready.
struct PositionalDistribution {
  std::vector<std::size_t> bin_start;  // inclusive feature position
  std::vector<std::size_t> bin_end;    // exclusive
  std::vector<std::uint64_t> top_counts;
  std::vector<std::uint64_t> worst_counts;
  std::size_t n_top = 0;
  std::size_t n_worst = 0;
  std::size_t n_instances = 0;

  std::string to_csv() const;
};

PositionalDistribution positional_distribution(const AttributionMatrix& attr,
                                               const FeatureSchema& schema, std::size_t n_top = 50,
                                               std::size_t n_worst = 50, std::size_t n_bins = 0,
                                               ClassScope scope = ClassScope::Both);

// Retrains on {all features, top-n kept, all minus bottom-m} and reports test
// accuracy per run, with the exact feature lists used.
struct SubsetRun {
  std::string label;
  std::vector<std::size_t> features;  // positions, ascending
  EvalReport eval;
};

struct SubsetValidationReport {
  SubsetRun all_features;
  SubsetRun top_subset;
  SubsetRun drop_subset;
  std::size_t keep_top_n = 0;
  std::size_t drop_bottom_m = 0;
  ModelKind model_kind = ModelKind::GradientBoostedTrees;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

SubsetValidationReport subset_validation(const LabeledDataset& train, const LabeledDataset& test,
                                         const RankingReport& ranking, std::size_t keep_top_n,
                                         std::size_t drop_bottom_m, const ModelHyper& hyper,
                                         std::uint64_t seed, std::size_t workers = 1);

Matrix select_columns(const Matrix& X, const std::vector<std::size_t>& positions);

}  // namespace finshap
