#include <algorithm>
#include <cmath>
#include <numeric>

#include "finshap/models.hpp"
#include "model_common.hpp"

namespace finshap {

double ClassificationTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].p1;
}

namespace {

struct CartBuilder {
  const Matrix& X;
  const std::vector<int>& y;
  const ForestConfig& cfg;
  std::size_t mtry;
  Rng& rng;
  ClassificationTree tree;

  static double gini(std::size_t n1, std::size_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(n1) / static_cast<double>(n);
    return 2.0 * p * (1.0 - p);
  }

  int build(std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t n = idx.size();
    std::size_t n1 = 0;
    for (std::size_t i : idx) n1 += static_cast<std::size_t>(y[i]);

    const bool pure = n1 == 0 || n1 == n;
    const bool depth_capped = cfg.max_depth > 0 && depth >= cfg.max_depth;
    if (pure || depth_capped || n < 2 * cfg.min_leaf || n < 2) {
      return make_leaf(n1, n);
    }

    // Candidate features in a seeded random order. Keep scanning past mtry
    // non-constant candidates only while no valid split has been found, like
    // the usual CART exhaustive fallback.
    std::vector<std::size_t> feature_order(static_cast<std::size_t>(X.cols()));
    std::iota(feature_order.begin(), feature_order.end(), std::size_t{0});
    rng.shuffle(feature_order);

    const double parent_gini = gini(n1, n);
    double best_decrease = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::size_t tried = 0;

    std::vector<std::pair<double, std::size_t>> sorted(n);
    for (std::size_t f : feature_order) {
      if (tried >= mtry && best_feature >= 0) break;
      for (std::size_t i = 0; i < n; ++i) {
        sorted[i] = {X(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(f)), idx[i]};
      }
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;  // constant in node
      ++tried;

      std::size_t left_n1 = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_n1 += static_cast<std::size_t>(y[sorted[i].second]);
        if (sorted[i + 1].first == sorted[i].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
        const double decrease =
            parent_gini - (static_cast<double>(nl) * gini(left_n1, nl) +
                           static_cast<double>(nr) * gini(n1 - left_n1, nr)) /
                              static_cast<double>(n);
        if (decrease > best_decrease) {
          best_decrease = decrease;
          best_feature = static_cast<int>(f);
          best_threshold = sorted[i].first + 0.5 * (sorted[i + 1].first - sorted[i].first);
        }
      }
    }

    if (best_feature < 0) return make_leaf(n1, n);

    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    for (std::size_t i : idx) {
      const double v = X(static_cast<Eigen::Index>(i), best_feature);
      (v <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    const int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({best_feature, best_threshold, -1, -1, 0.0});
    const int left = build(left_idx, depth + 1);
    tree.nodes[static_cast<std::size_t>(self)].left = left;
    const int right = build(right_idx, depth + 1);
    tree.nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }

  int make_leaf(std::size_t n1, std::size_t n) {
    const int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(
        {-1, 0.0, -1, -1, n == 0 ? 0.0 : static_cast<double>(n1) / static_cast<double>(n)});
    return self;
  }
};

ClassificationTree grow_tree(const Matrix& X, const std::vector<int>& y, const ForestConfig& cfg,
                             std::size_t mtry, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(X.rows());
  std::vector<std::size_t> idx;
  idx.reserve(n);
  if (cfg.bootstrap) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(rng.below(n));
    std::sort(idx.begin(), idx.end());
  } else {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  }
  CartBuilder builder{X, y, cfg, mtry, rng, {}};
  builder.build(idx, 0);
  return std::move(builder.tree);
}

}  // namespace

std::unique_ptr<RandomForestModel> train_random_forest(const Matrix& X, const std::vector<int>& y,
                                                       const ForestConfig& config,
                                                       std::size_t workers) {
  detail::validate_training_inputs(X, y);
  const auto F = static_cast<std::size_t>(X.cols());
  if (config.n_trees == 0) throw ConfigError("train_random_forest: n_trees must be >= 1");
  if (config.mtry > F) {
    throw ConfigError("train_random_forest: mtry = " + std::to_string(config.mtry) +
                      " exceeds feature count " + std::to_string(F));
  }
  const std::size_t mtry =
      config.mtry > 0 ? config.mtry
                      : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(F))));

  std::vector<ClassificationTree> trees(config.n_trees);
  parallel_for(config.n_trees, workers, [&](std::size_t t) {
    trees[t] = grow_tree(X, y, config, mtry, derive_seed(config.seed, "tree", t));
  });
  return std::make_unique<RandomForestModel>(std::move(trees), F, config);
}

RandomForestModel::RandomForestModel(std::vector<ClassificationTree> trees,
                                     std::size_t feature_count, ForestConfig config)
    : trees_(std::move(trees)), feature_count_(feature_count), config_(config) {}

Vector RandomForestModel::predict_proba_impl(const Matrix& X) const {
  Vector out = Vector::Zero(X.rows());
  for (const auto& tree : trees_) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) out[r] += tree.predict(X.row(r));
  }
  out /= static_cast<double>(trees_.size());
  return out;
}

nlohmann::json RandomForestModel::to_json() const {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = to_string(ModelKind::RandomForest);
  doc["feature_count"] = feature_count_;
  doc["config"] = {{"n_trees", config_.n_trees},   {"max_depth", config_.max_depth},
                   {"min_leaf", config_.min_leaf}, {"mtry", config_.mtry},
                   {"bootstrap", config_.bootstrap}, {"seed", config_.seed}};
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& nd : tree.nodes) {
      nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.p1});
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc;
}

std::unique_ptr<RandomForestModel> RandomForestModel::from_json(const nlohmann::json& doc) {
  ForestConfig config;
  const auto& c = doc.at("config");
  config.n_trees = c.at("n_trees").get<std::size_t>();
  config.max_depth = c.at("max_depth").get<std::size_t>();
  config.min_leaf = c.at("min_leaf").get<std::size_t>();
  config.mtry = c.at("mtry").get<std::size_t>();
  config.bootstrap = c.at("bootstrap").get<bool>();
  config.seed = c.at("seed").get<std::uint64_t>();
  std::vector<ClassificationTree> trees;
  for (const auto& tjson : doc.at("trees")) {
    ClassificationTree tree;
    for (const auto& nd : tjson) {
      tree.nodes.push_back({nd.at(0).get<int>(), nd.at(1).get<double>(), nd.at(2).get<int>(),
                            nd.at(3).get<int>(), nd.at(4).get<double>()});
    }
    trees.push_back(std::move(tree));
  }
  return std::make_unique<RandomForestModel>(std::move(trees),
                                             doc.at("feature_count").get<std::size_t>(), config);
}

}  // namespace finshap
