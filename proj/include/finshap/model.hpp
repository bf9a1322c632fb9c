#pragma once

#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "finshap/common.hpp"

namespace finshap {

enum class ModelKind { Logistic, RandomForest, GradientBoostedTrees, SvmRbf };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Shared probability-prediction contract. Trained models are immutable and
// safe for concurrent prediction.
class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t feature_count() const = 0;

  // Class-1 probability per row, each in [0, 1]. Deterministic.
  Vector predict_proba(const Matrix& X) const {
    if (static_cast<std::size_t>(X.cols()) != feature_count()) {
      throw ShapeError("predict_proba: expected " + std::to_string(feature_count()) +
                       " features, got " + std::to_string(X.cols()));
    }
    if (X.rows() == 0) return Vector(0);
    return predict_proba_impl(X);
  }

  virtual nlohmann::json to_json() const = 0;

 protected:
  virtual Vector predict_proba_impl(const Matrix& X) const = 0;
};

// Versioned JSON round-trip; reloaded models reproduce predictions bit-exactly.
void save_model(const Model& model, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path);
std::unique_ptr<Model> model_from_json(const nlohmann::json& doc);

}  // namespace finshap
