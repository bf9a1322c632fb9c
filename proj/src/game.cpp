#include "finshap/game.hpp"

#include <utility>

namespace finshap {

Partition::Partition(std::size_t player_count, std::vector<Coalition> groups)
    : player_count_(player_count), groups_(std::move(groups)) {
  if (groups_.empty()) throw DataError("partition: no groups");
  Coalition seen(player_count_);
  std::size_t total = 0;
  for (const auto& g : groups_) {
    if (g.player_count() != player_count_) {
      throw DataError("partition: group player count mismatch");
    }
    for (std::size_t i : g.members()) {
      if (seen.contains(i)) {
        throw DataError("partition: player " + std::to_string(i) + " appears in two groups");
      }
      seen.insert(i);
    }
    total += g.size();
  }
  if (total != player_count_) {
    throw DataError("partition: groups cover " + std::to_string(total) + " of " +
                    std::to_string(player_count_) + " players");
  }
}

Partition Partition::singletons(std::size_t player_count) {
  std::vector<Coalition> groups;
  groups.reserve(player_count);
  for (std::size_t i = 0; i < player_count; ++i) {
    Coalition g(player_count);
    g.insert(i);
    groups.push_back(std::move(g));
  }
  return Partition(player_count, std::move(groups));
}

std::shared_ptr<CoalitionGame> masking_game(ProbaFn predict, const Vector& instance,
                                            const Matrix& background, BaselineMode baseline) {
  if (background.rows() == 0) throw ConfigError("masking_game: background must have B >= 1 rows");
  if (background.cols() != instance.size()) {
    throw ShapeError("masking_game: instance width " + std::to_string(instance.size()) +
                     " != background width " + std::to_string(background.cols()));
  }
  const std::size_t M = static_cast<std::size_t>(instance.size());

  double base;
  if (baseline == BaselineMode::MeanBackground) {
    base = predict(background).mean();
  } else {
    base = 0.5;
  }

  auto value = [predict = std::move(predict), instance, background, base](const Coalition& s) {
    Matrix composed = background;
    for (std::size_t i : s.members()) {
      composed.col(static_cast<Eigen::Index>(i)).setConstant(instance[static_cast<Eigen::Index>(i)]);
    }
    return predict(composed).mean() - base;
  };
  return std::make_shared<CoalitionGame>(M, std::move(value));
}

std::shared_ptr<CoalitionGame> masking_game(const Model& model, const Vector& instance,
                                            const Matrix& background, int target_class,
                                            BaselineMode baseline) {
  if (target_class != 0 && target_class != 1) {
    throw ConfigError("masking_game: target_class must be 0 or 1");
  }
  if (static_cast<std::size_t>(instance.size()) != model.feature_count()) {
    throw ShapeError("masking_game: instance width != model feature count");
  }
  ProbaFn predict;
  if (target_class == 1) {
    predict = [&model](const Matrix& X) { return model.predict_proba(X); };
  } else {
    predict = [&model](const Matrix& X) -> Vector {
      return (1.0 - model.predict_proba(X).array()).matrix();
    };
  }
  return masking_game(std::move(predict), instance, background, baseline);
}

Matrix sample_background(const Matrix& train_X, std::size_t B, std::uint64_t seed) {
  if (B == 0) throw ConfigError("sample_background: B must be >= 1");
  const std::size_t n = static_cast<std::size_t>(train_X.rows());
  if (n == 0) throw DataError("sample_background: empty training matrix");
  if (B >= n) return train_X;
  Rng rng(seed);
  auto picks = rng.sample_without_replacement(n, B);
  Matrix out(static_cast<Eigen::Index>(B), train_X.cols());
  for (std::size_t i = 0; i < B; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = train_X.row(static_cast<Eigen::Index>(picks[i]));
  }
  return out;
}

}  // namespace finshap
