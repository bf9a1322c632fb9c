#include "finshap/model.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "finshap/models.hpp"

namespace finshap {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Logistic: return "logistic";
    case ModelKind::RandomForest: return "random_forest";
    case ModelKind::GradientBoostedTrees: return "gbt";
    case ModelKind::SvmRbf: return "svm_rbf";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "logistic") return ModelKind::Logistic;
  if (name == "random_forest") return ModelKind::RandomForest;
  if (name == "gbt" || name == "xgboost") return ModelKind::GradientBoostedTrees;
  if (name == "svm_rbf" || name == "svm") return ModelKind::SvmRbf;
  throw ConfigError("unknown model kind: " + name);
}

std::unique_ptr<Model> model_from_json(const nlohmann::json& doc) {
  const auto version = doc.at("format_version").get<int>();
  if (version != 1) {
    throw DataError("model json: unsupported format_version " + std::to_string(version));
  }
  switch (model_kind_from_string(doc.at("kind").get<std::string>())) {
    case ModelKind::Logistic: return LogisticModel::from_json(doc);
    case ModelKind::RandomForest: return RandomForestModel::from_json(doc);
    case ModelKind::GradientBoostedTrees: return GbtModel::from_json(doc);
    case ModelKind::SvmRbf: return SvmRbfModel::from_json(doc);
  }
  throw DataError("model json: unknown kind");
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("save_model: cannot write " + path);
  out << model.to_json().dump(2) << '\n';
}

std::unique_ptr<Model> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_model: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_model: " + path + " is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

std::unique_ptr<Model> train_model(const Matrix& X, const std::vector<int>& y,
                                   const ModelHyper& hyper, std::uint64_t seed,
                                   std::size_t workers) {
  switch (hyper.kind) {
    case ModelKind::Logistic: return train_logistic(X, y, hyper.logistic);
    case ModelKind::RandomForest: {
      ForestConfig cfg = hyper.forest;
      cfg.seed = seed;
      return train_random_forest(X, y, cfg, workers);
    }
    case ModelKind::GradientBoostedTrees: {
      GbtConfig cfg = hyper.gbt;
      cfg.seed = seed;
      return train_gbt(X, y, cfg);
    }
    case ModelKind::SvmRbf: return train_svm_rbf(X, y, hyper.svm);
  }
  throw ConfigError("train_model: unknown model kind");
}

}  // namespace finshap
