#pragma once

// Test-only oracles, kept independent of the library implementations they
// check: factorial-enumeration Shapley values, brute-force pairwise AUC, and
// exhaustive depth-2 decision rules.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "finshap/game.hpp"

namespace oracles {

// Characteristic function as a dense table over bitmasks (M <= 25 or so).
struct TabularGame {
  std::size_t players = 0;
  std::vector<double> values;  // index = coalition bitmask

  finshap::CoalitionGame make() const {
    return finshap::CoalitionGame(players, [this](const finshap::Coalition& c) {
      return values[c.words().empty() ? 0 : c.words()[0]];
    });
  }
  std::shared_ptr<finshap::CoalitionGame> make_shared() const {
    const auto vals = values;
    return std::make_shared<finshap::CoalitionGame>(
        players,
        [vals](const finshap::Coalition& c) { return vals[c.words().empty() ? 0 : c.words()[0]]; });
  }
};

inline TabularGame glove_game() {
  // Player 0 holds a left glove, players 1 and 2 right gloves; a pair pays 1.
  TabularGame g;
  g.players = 3;
  g.values.assign(8, 0.0);
  for (std::uint64_t mask = 0; mask < 8; ++mask) {
    if ((mask & 1) && (mask & 6)) g.values[mask] = 1.0;
  }
  return g;
}

inline TabularGame additive_game(const std::vector<double>& weights) {
  TabularGame g;
  g.players = weights.size();
  g.values.assign(std::size_t{1} << weights.size(), 0.0);
  for (std::uint64_t mask = 0; mask < g.values.size(); ++mask) {
    double v = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (mask & (1ULL << i)) v += weights[i];
    }
    g.values[mask] = v;
  }
  return g;
}

inline TabularGame unanimity_game(std::size_t players, std::uint64_t required_mask) {
  TabularGame g;
  g.players = players;
  g.values.assign(std::size_t{1} << players, 0.0);
  for (std::uint64_t mask = 0; mask < g.values.size(); ++mask) {
    if ((mask & required_mask) == required_mask) g.values[mask] = 1.0;
  }
  return g;
}

// Independent uniform values per coalition, v(empty) = 0.
inline TabularGame random_game(std::size_t players, finshap::Rng& rng, double lo = -1.0,
                               double hi = 1.0) {
  TabularGame g;
  g.players = players;
  g.values.resize(std::size_t{1} << players);
  for (auto& v : g.values) v = rng.uniform(lo, hi);
  g.values[0] = 0.0;
  return g;
}

// Additive backbone with bounded coalition noise: players differ strongly,
// the noise keeps the game non-trivial.
inline TabularGame random_mixed_game(std::size_t players, finshap::Rng& rng,
                                     double noise = 0.2) {
  std::vector<double> weights(players);
  for (auto& w : weights) w = rng.uniform(-1.0, 1.0);
  TabularGame g = additive_game(weights);
  for (std::uint64_t mask = 1; mask < g.values.size(); ++mask) {
    g.values[mask] += noise * rng.uniform(-1.0, 1.0);
  }
  return g;
}

// Average marginal contribution over every join order; M! enumeration.
inline std::vector<double> permutation_shapley(const TabularGame& game) {
  const std::size_t m = game.players;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> phi(m, 0.0);
  std::size_t n_perms = 0;
  do {
    std::uint64_t mask = 0;
    double prev = game.values[0];
    for (std::size_t player : order) {
      mask |= 1ULL << player;
      phi[player] += game.values[mask] - prev;
      prev = game.values[mask];
    }
    ++n_perms;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& p : phi) p /= static_cast<double>(n_perms);
  return phi;
}

// All positive-negative pairs, ties worth one half; doubled counts stay exact.
inline double brute_force_auc(const std::vector<int>& y, const std::vector<double>& s) {
  std::uint64_t wins_x2 = 0;
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1) {
      ++n_pos;
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (y[j] == 1) continue;
        if (s[i] > s[j]) {
          wins_x2 += 2;
        } else if (s[i] == s[j]) {
          wins_x2 += 1;
        }
      }
    } else {
      ++n_neg;
    }
  }
  return static_cast<double>(wins_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Best training accuracy over every axis-aligned decision rule of depth <= 2
// with thresholds at observed midpoints. Exhaustive, tiny inputs only.
inline double best_depth2_rule_accuracy(const finshap::Matrix& X, const std::vector<int>& y) {
  const auto n = X.rows();
  const auto F = X.cols();
  auto thresholds = [&](Eigen::Index f) {
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = X(i, f);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) out.push_back(0.5 * (vals[i] + vals[i + 1]));
    return out;
  };

  // Leaf-majority accuracy for a fixed pair of split paths.
  auto evaluate = [&](Eigen::Index f1, double t1, Eigen::Index f2a, double t2a, Eigen::Index f2b,
                      double t2b) {
    std::size_t counts[4][2] = {};
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool left = X(i, f1) <= t1;
      const bool sub = left ? (X(i, f2a) <= t2a) : (X(i, f2b) <= t2b);
      ++counts[(left ? 0 : 2) + (sub ? 0 : 1)][static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
    }
    std::size_t correct = 0;
    for (auto& leaf : counts) correct += std::max(leaf[0], leaf[1]);
    return static_cast<double>(correct) / static_cast<double>(n);
  };

  double best = 0.0;
  for (Eigen::Index f1 = 0; f1 < F; ++f1) {
    for (double t1 : thresholds(f1)) {
      for (Eigen::Index f2a = 0; f2a < F; ++f2a) {
        auto ts_a = thresholds(f2a);
        ts_a.push_back(std::numeric_limits<double>::infinity());  // no second split
        for (double t2a : ts_a) {
          for (Eigen::Index f2b = 0; f2b < F; ++f2b) {
            auto ts_b = thresholds(f2b);
            ts_b.push_back(std::numeric_limits<double>::infinity());
            for (double t2b : ts_b) {
              best = std::max(best, evaluate(f1, t1, f2a, t2a, f2b, t2b));
              if (best == 1.0) return best;
            }
          }
        }
      }
    }
  }
  return best;
}

}  // namespace oracles
