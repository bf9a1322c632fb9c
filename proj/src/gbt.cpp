#include <algorithm>
#include <cmath>
#include <numeric>

#include "finshap/models.hpp"
#include "model_common.hpp"

namespace finshap {

using detail::sigmoid;
using detail::softplus;

double GbtTree::value(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const GbtNode& nd = nodes[static_cast<std::size_t>(node)];
    node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].weight;
}

namespace {

constexpr double kMinGain = 1e-12;

double leaf_weight(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? -g / denom : 0.0;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda) {
  auto score = [lambda](double g, double h) { return g * g / (h + lambda); };
  return 0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr));
}

// One regression tree on (g, h), grown level by level with exact greedy
// splits over pre-sorted feature lists.
GbtTree fit_tree(const Matrix& X, const std::vector<std::vector<std::size_t>>& sorted_idx,
                 const Vector& g, const Vector& h, const GbtConfig& cfg,
                 std::vector<int>& row_node) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const std::size_t F = static_cast<std::size_t>(X.cols());

  GbtTree tree;
  struct NodeStats {
    double G = 0.0;
    double H = 0.0;
    double best_gain = kMinGain;
    int best_feature = -1;
    double best_threshold = 0.0;
  };

  double root_g = 0.0;
  double root_h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    root_g += g[static_cast<Eigen::Index>(i)];
    root_h += h[static_cast<Eigen::Index>(i)];
  }
  tree.nodes.push_back({-1, 0.0, -1, -1, 0.0});
  std::fill(row_node.begin(), row_node.end(), 0);

  std::vector<int> active = {0};
  std::vector<NodeStats> stats(1);
  stats[0].G = root_g;
  stats[0].H = root_h;

  for (std::size_t depth = 0; depth < cfg.max_depth && !active.empty(); ++depth) {
    // slot_of[node_id] >= 0 only for this level's active nodes.
    std::vector<int> slot_of(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < active.size(); ++s) slot_of[static_cast<std::size_t>(active[s])] = static_cast<int>(s);

    std::vector<double> left_g(active.size());
    std::vector<double> left_h(active.size());
    std::vector<std::size_t> left_count(active.size());
    std::vector<double> last_value(active.size());

    for (std::size_t f = 0; f < F; ++f) {
      std::fill(left_g.begin(), left_g.end(), 0.0);
      std::fill(left_h.begin(), left_h.end(), 0.0);
      std::fill(left_count.begin(), left_count.end(), std::size_t{0});

      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = sorted_idx[f][k];
        const int node = row_node[i];
        if (node < 0) continue;
        const int slot = slot_of[static_cast<std::size_t>(node)];
        if (slot < 0) continue;
        const double v = X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
        NodeStats& st = stats[static_cast<std::size_t>(slot)];
        if (left_count[static_cast<std::size_t>(slot)] > 0 &&
            v > last_value[static_cast<std::size_t>(slot)]) {
          const double gl = left_g[static_cast<std::size_t>(slot)];
          const double hl = left_h[static_cast<std::size_t>(slot)];
          const double gr = st.G - gl;
          const double hr = st.H - hl;
          if (hl >= cfg.min_child_weight && hr >= cfg.min_child_weight) {
            const double gain = split_gain(gl, hl, gr, hr, cfg.lambda);
            if (gain > st.best_gain) {
              st.best_gain = gain;
              st.best_feature = static_cast<int>(f);
              st.best_threshold =
                  last_value[static_cast<std::size_t>(slot)] +
                  0.5 * (v - last_value[static_cast<std::size_t>(slot)]);
            }
          }
        }
        left_g[static_cast<std::size_t>(slot)] += g[static_cast<Eigen::Index>(i)];
        left_h[static_cast<std::size_t>(slot)] += h[static_cast<Eigen::Index>(i)];
        ++left_count[static_cast<std::size_t>(slot)];
        last_value[static_cast<std::size_t>(slot)] = v;
      }
    }

    // Materialize the level: split where a positive gain exists, else leaf.
    std::vector<int> next_active;
    std::vector<NodeStats> next_stats;
    std::vector<int> child_base(active.size(), -1);
    for (std::size_t s = 0; s < active.size(); ++s) {
      NodeStats& st = stats[s];
      GbtNode& nd = tree.nodes[static_cast<std::size_t>(active[s])];
      if (st.best_feature < 0) {
        nd.weight = cfg.learning_rate * leaf_weight(st.G, st.H, cfg.lambda);
        continue;
      }
      nd.feature = st.best_feature;
      nd.threshold = st.best_threshold;
      nd.left = static_cast<int>(tree.nodes.size());
      nd.right = nd.left + 1;
      child_base[s] = nd.left;
      tree.nodes.push_back({-1, 0.0, -1, -1, 0.0});
      tree.nodes.push_back({-1, 0.0, -1, -1, 0.0});
      next_active.push_back(nd.left);
      next_active.push_back(nd.right);
      next_stats.emplace_back();
      next_stats.emplace_back();
    }

    // Reassign rows to children and accumulate child stats.
    std::vector<int> next_slot_of(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < next_active.size(); ++s) {
      next_slot_of[static_cast<std::size_t>(next_active[s])] = static_cast<int>(s);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int node = row_node[i];
      if (node < 0) continue;
      const int slot = slot_of[static_cast<std::size_t>(node)];
      if (slot < 0 || child_base[static_cast<std::size_t>(slot)] < 0) continue;
      const GbtNode& nd = tree.nodes[static_cast<std::size_t>(node)];
      const double v = X(static_cast<Eigen::Index>(i), nd.feature);
      const int child = v <= nd.threshold ? nd.left : nd.right;
      row_node[i] = child;
      NodeStats& cst = next_stats[static_cast<std::size_t>(next_slot_of[static_cast<std::size_t>(child)])];
      cst.G += g[static_cast<Eigen::Index>(i)];
      cst.H += h[static_cast<Eigen::Index>(i)];
    }
    active = std::move(next_active);
    stats = std::move(next_stats);
  }

  // Depth cap reached: remaining active nodes close as leaves.
  for (std::size_t s = 0; s < active.size(); ++s) {
    GbtNode& nd = tree.nodes[static_cast<std::size_t>(active[s])];
    nd.weight = cfg.learning_rate * leaf_weight(stats[s].G, stats[s].H, cfg.lambda);
  }
  return tree;
}

double train_log_loss(const Vector& margins, const std::vector<int>& y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    const double sign = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    loss += softplus(-sign * margins[i]);
  }
  return loss / static_cast<double>(margins.size());
}

}  // namespace

std::unique_ptr<GbtModel> train_gbt(const Matrix& X, const std::vector<int>& y,
                                    const GbtConfig& config) {
  detail::validate_training_inputs(X, y);
  if (config.learning_rate <= 0.0) throw ConfigError("train_gbt: learning_rate must be > 0");
  if (config.lambda < 0.0) throw ConfigError("train_gbt: lambda must be >= 0");
  if (config.max_depth == 0) throw ConfigError("train_gbt: max_depth must be >= 1");

  const std::size_t n = static_cast<std::size_t>(X.rows());
  const std::size_t F = static_cast<std::size_t>(X.cols());

  double mean_y = 0.0;
  for (int v : y) mean_y += v;
  mean_y = std::clamp(mean_y / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  const double base_score = std::log(mean_y / (1.0 - mean_y));

  std::vector<std::vector<std::size_t>> sorted_idx(F);
  for (std::size_t f = 0; f < F; ++f) {
    auto& order = sorted_idx[f];
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = X(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f));
      const double vb = X(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f));
      return va < vb || (va == vb && a < b);
    });
  }

  Vector margins = Vector::Constant(static_cast<Eigen::Index>(n), base_score);
  Vector g(static_cast<Eigen::Index>(n));
  Vector h(static_cast<Eigen::Index>(n));
  std::vector<int> row_node(n, 0);
  std::vector<GbtTree> trees;
  std::vector<double> trace;
  trace.push_back(train_log_loss(margins, y));

  for (std::size_t round = 0; round < config.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margins[static_cast<Eigen::Index>(i)]);
      g[static_cast<Eigen::Index>(i)] = p - static_cast<double>(y[i]);
      h[static_cast<Eigen::Index>(i)] = p * (1.0 - p);
    }
    GbtTree tree = fit_tree(X, sorted_idx, g, h, config, row_node);
    for (std::size_t i = 0; i < n; ++i) {
      margins[static_cast<Eigen::Index>(i)] +=
          tree.nodes[static_cast<std::size_t>(row_node[i])].weight;
    }
    trees.push_back(std::move(tree));
    trace.push_back(train_log_loss(margins, y));
  }

  return std::make_unique<GbtModel>(base_score, std::move(trees), F, config, std::move(trace));
}

GbtModel::GbtModel(double base_score, std::vector<GbtTree> trees, std::size_t feature_count,
                   GbtConfig config, std::vector<double> loss_trace)
    : base_score_(base_score),
      trees_(std::move(trees)),
      feature_count_(feature_count),
      config_(config),
      loss_trace_(std::move(loss_trace)) {}

Vector GbtModel::predict_proba_impl(const Matrix& X) const {
  Vector margins = Vector::Constant(X.rows(), base_score_);
  for (const auto& tree : trees_) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) margins[r] += tree.value(X.row(r));
  }
  return margins.unaryExpr([](double z) { return sigmoid(z); });
}

nlohmann::json GbtModel::to_json() const {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = to_string(ModelKind::GradientBoostedTrees);
  doc["feature_count"] = feature_count_;
  doc["base_score"] = base_score_;
  doc["config"] = {{"n_rounds", config_.n_rounds},
                   {"learning_rate", config_.learning_rate},
                   {"max_depth", config_.max_depth},
                   {"lambda", config_.lambda},
                   {"min_child_weight", config_.min_child_weight},
                   {"seed", config_.seed}};
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& nd : tree.nodes) {
      nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.weight});
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  doc["loss_trace"] = loss_trace_;
  return doc;
}

std::unique_ptr<GbtModel> GbtModel::from_json(const nlohmann::json& doc) {
  GbtConfig config;
  const auto& c = doc.at("config");
  config.n_rounds = c.at("n_rounds").get<std::size_t>();
  config.learning_rate = c.at("learning_rate").get<double>();
  config.max_depth = c.at("max_depth").get<std::size_t>();
  config.lambda = c.at("lambda").get<double>();
  config.min_child_weight = c.at("min_child_weight").get<double>();
  config.seed = c.at("seed").get<std::uint64_t>();
  std::vector<GbtTree> trees;
  for (const auto& tjson : doc.at("trees")) {
    GbtTree tree;
    for (const auto& nd : tjson) {
      tree.nodes.push_back({nd.at(0).get<int>(), nd.at(1).get<double>(), nd.at(2).get<int>(),
                            nd.at(3).get<int>(), nd.at(4).get<double>()});
    }
    trees.push_back(std::move(tree));
  }
  return std::make_unique<GbtModel>(doc.at("base_score").get<double>(), std::move(trees),
                                    doc.at("feature_count").get<std::size_t>(), config,
                                    doc.at("loss_trace").get<std::vector<double>>());
}

}  // namespace finshap
