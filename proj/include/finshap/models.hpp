#pragma once

#include <memory>
#include <vector>

#include "finshap/model.hpp"

namespace finshap {

// Train-set standardization for the scale-sensitive families (logistic, SVM);
// trees consume raw values.
struct Standardizer {
  Vector mean;
  Vector sigma;  // floored at 1e-9

  static Standardizer fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
};

// --------------------------------------------------------------------------
// Logistic regression
// --------------------------------------------------------------------------

struct LogisticConfig {
  double l2 = 1.0;
  std::size_t max_iters = 100;
  double tol = 1e-8;
};

class LogisticModel : public Model {
 public:
  LogisticModel(Vector weights, double bias, Standardizer scaler, LogisticConfig config,
                std::vector<double> loss_trace);

  ModelKind kind() const override { return ModelKind::Logistic; }
  std::size_t feature_count() const override { return static_cast<std::size_t>(weights_.size()); }
  nlohmann::json to_json() const override;
  static std::unique_ptr<LogisticModel> from_json(const nlohmann::json& doc);

  const Vector& weights() const { return weights_; }
  double bias() const { return bias_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }

 protected:
  Vector predict_proba_impl(const Matrix& X) const override;

 private:
  Vector weights_;
  double bias_;
  Standardizer scaler_;
  LogisticConfig config_;
  std::vector<double> loss_trace_;
};

// Mean logistic log-loss plus (l2/2)||w||^2 with an unpenalized bias, on
// already-standardized rows. Optionally emits the analytic gradient.
double logistic_objective(const Matrix& Z, const std::vector<int>& y, const Vector& w, double b,
                          double l2, Vector* grad_w = nullptr, double* grad_b = nullptr);

std::unique_ptr<LogisticModel> train_logistic(const Matrix& X, const std::vector<int>& y,
                                              const LogisticConfig& config = {});

// --------------------------------------------------------------------------
// Random forest (bagged CART, Gini splits)
// --------------------------------------------------------------------------

struct ForestConfig {
  std::size_t n_trees = 300;
  std::size_t max_depth = 0;  // 0 = unbounded
  std::size_t min_leaf = 1;
  std::size_t mtry = 0;  // 0 = ceil(sqrt(F))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double p1 = 0.0;  // leaf class-1 frequency

  bool operator==(const TreeNode&) const = default;
};

struct ClassificationTree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  bool operator==(const ClassificationTree&) const = default;
};

class RandomForestModel : public Model {
 public:
  RandomForestModel(std::vector<ClassificationTree> trees, std::size_t feature_count,
                    ForestConfig config);

  ModelKind kind() const override { return ModelKind::RandomForest; }
  std::size_t feature_count() const override { return feature_count_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<RandomForestModel> from_json(const nlohmann::json& doc);

  const std::vector<ClassificationTree>& trees() const { return trees_; }

 protected:
  Vector predict_proba_impl(const Matrix& X) const override;

 private:
  std::vector<ClassificationTree> trees_;
  std::size_t feature_count_;
  ForestConfig config_;
};

// Per-tree seeds derive from config.seed by index, so any worker count yields
// the sequential result.
std::unique_ptr<RandomForestModel> train_random_forest(const Matrix& X, const std::vector<int>& y,
                                                       const ForestConfig& config = {},
                                                       std::size_t workers = 1);

// --------------------------------------------------------------------------
// Gradient boosted trees (second-order boosting on log-odds)
// --------------------------------------------------------------------------

struct GbtConfig {
  std::size_t n_rounds = 200;
  double learning_rate = 0.1;
  std::size_t max_depth = 4;
  double lambda = 1.0;  // leaf L2
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;
};

struct GbtNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf log-odds increment (learning rate folded in)

  bool operator==(const GbtNode&) const = default;
};

struct GbtTree {
  std::vector<GbtNode> nodes;

  double value(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  bool operator==(const GbtTree&) const = default;
};

class GbtModel : public Model {
 public:
  GbtModel(double base_score, std::vector<GbtTree> trees, std::size_t feature_count,
           GbtConfig config, std::vector<double> loss_trace);

  ModelKind kind() const override { return ModelKind::GradientBoostedTrees; }
  std::size_t feature_count() const override { return feature_count_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<GbtModel> from_json(const nlohmann::json& doc);

  double base_score() const { return base_score_; }
  const std::vector<GbtTree>& trees() const { return trees_; }
  // loss_trace[r] = training log-loss after r rounds (entry 0 is the prior).
  const std::vector<double>& loss_trace() const { return loss_trace_; }

 protected:
  Vector predict_proba_impl(const Matrix& X) const override;

 private:
  double base_score_;
  std::vector<GbtTree> trees_;
  std::size_t feature_count_;
  GbtConfig config_;
  std::vector<double> loss_trace_;
};

std::unique_ptr<GbtModel> train_gbt(const Matrix& X, const std::vector<int>& y,
                                    const GbtConfig& config = {});

// --------------------------------------------------------------------------
// RBF-kernel SVM (SMO dual solver, Platt-calibrated probabilities)
// --------------------------------------------------------------------------

struct SvmConfig {
  double C = 1.0;
  double gamma = 0.0;  // 0 = 1/F
  double tol = 1e-3;
  std::size_t max_passes = 100;  // cap on outer SMO sweeps
};

class SvmRbfModel : public Model {
 public:
  SvmRbfModel(Matrix support_vectors, Vector coefficients, double bias, double gamma,
              double platt_a, double platt_b, Standardizer scaler, SvmConfig config);

  ModelKind kind() const override { return ModelKind::SvmRbf; }
  std::size_t feature_count() const override { return static_cast<std::size_t>(scaler_.mean.size()); }
  nlohmann::json to_json() const override;
  static std::unique_ptr<SvmRbfModel> from_json(const nlohmann::json& doc);

  // Raw margins sum(alpha_i y_i k(x_i, x)) + b.
  Vector decision_function(const Matrix& X) const;
  std::size_t support_vector_count() const { return static_cast<std::size_t>(coefficients_.size()); }

 protected:
  Vector predict_proba_impl(const Matrix& X) const override;

 private:
  Matrix support_vectors_;  // standardized space
  Vector coefficients_;     // alpha_i * y_i
  double bias_;
  double gamma_;
  double platt_a_;
  double platt_b_;
  Standardizer scaler_;
  SvmConfig config_;
};

// Full dual state for KKT inspection in tests.
struct SvmTrainDetail {
  std::unique_ptr<SvmRbfModel> model;
  std::vector<double> alphas;  // one per training row
  Vector decision_values;     // margins on the training rows
  double effective_gamma = 0.0;
};

SvmTrainDetail train_svm_rbf_detailed(const Matrix& X, const std::vector<int>& y,
                                      const SvmConfig& config = {});
std::unique_ptr<SvmRbfModel> train_svm_rbf(const Matrix& X, const std::vector<int>& y,
                                           const SvmConfig& config = {});

// --------------------------------------------------------------------------
// Kind-indexed dispatch used by the pipeline and CLI
// --------------------------------------------------------------------------

struct ModelHyper {
  ModelKind kind = ModelKind::GradientBoostedTrees;
  LogisticConfig logistic;
  ForestConfig forest;
  GbtConfig gbt;
  SvmConfig svm;
};

// Trains the selected family; `seed` overrides the per-family seed field.
std::unique_ptr<Model> train_model(const Matrix& X, const std::vector<int>& y,
                                   const ModelHyper& hyper, std::uint64_t seed,
                                   std::size_t workers = 1);

}  // namespace finshap
