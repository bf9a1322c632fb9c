#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "finshap/metrics.hpp"
#include "oracles.hpp"

using namespace finshap;

TEST_CASE("accuracy is the exact match ratio") {
  CHECK(accuracy({1, 0, 1}, {1, 0, 1}) == 1.0);
  CHECK(accuracy({1, 0}, {0, 1}) == 0.0);
  CHECK(accuracy({1, 0, 1, 0}, {1, 0, 0, 0}) == 0.75);
}

TEST_CASE("accuracy rejects empty and mismatched inputs") {
  CHECK_THROWS_AS(accuracy({}, {}), DataError);
  CHECK_THROWS_AS(accuracy({1, 0}, {1}), ShapeError);
}

TEST_CASE("accuracy is invariant under a shared permutation") {
  Rng rng(11);
  std::vector<int> y_true;
  std::vector<int> y_pred;
  for (int i = 0; i < 64; ++i) {
    y_true.push_back(rng.uniform() < 0.5 ? 1 : 0);
    y_pred.push_back(rng.uniform() < 0.5 ? 1 : 0);
  }
  const double base = accuracy(y_true, y_pred);
  std::vector<std::size_t> perm(y_true.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm);
  std::vector<int> t2;
  std::vector<int> p2;
  for (std::size_t i : perm) {
    t2.push_back(y_true[i]);
    p2.push_back(y_pred[i]);
  }
  CHECK(accuracy(t2, p2) == base);
}

TEST_CASE("roc_auc on the worked examples") {
  CHECK(roc_auc({1, 1, 0, 0}, {0.9, 0.8, 0.3, 0.2}) == 1.0);
  // Brute force over the 4 positive-negative pairs: 3 wins of 4.
  CHECK(roc_auc({1, 0, 1, 0}, {0.9, 0.8, 0.7, 0.1}) == 0.75);
  CHECK(roc_auc({1, 0}, {0.5, 0.5}) == 0.5);
}

TEST_CASE("roc_auc errors: empty, single class") {
  CHECK_THROWS_AS(roc_auc({}, {}), DataError);
  CHECK_THROWS_AS(roc_auc({1, 1}, {0.3, 0.4}), DataError);
  CHECK_THROWS_AS(roc_auc({0, 0}, {0.3, 0.4}), DataError);
}

TEST_CASE("roc_auc equals brute-force pair counting, ties included") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<int> y(n);
    std::vector<double> s(n);
    bool seen[2] = {false, false};
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform() < 0.5 ? 1 : 0;
      seen[y[i]] = true;
      // Coarse grid half the time to force score ties.
      s[i] = trial % 2 == 0 ? std::floor(rng.uniform() * 8.0) / 8.0 : rng.uniform();
    }
    if (!seen[0] || !seen[1]) {
      y[0] = 0;
      y[1] = 1;
    }
    CHECK(roc_auc(y, s) == oracles::brute_force_auc(y, s));
  }
}

TEST_CASE("roc_auc is exactly invariant under strictly increasing transforms") {
  Rng rng(7);
  std::vector<int> y;
  std::vector<double> s;
  for (int i = 0; i < 150; ++i) {
    y.push_back(rng.uniform() < 0.4 ? 1 : 0);
    s.push_back(std::floor(rng.uniform() * 20.0) / 20.0);
  }
  y[0] = 0;
  y[1] = 1;
  const double base = roc_auc(y, s);
  std::vector<double> exp_s(s.size());
  std::vector<double> affine_s(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    exp_s[i] = std::exp(3.0 * s[i]);
    affine_s[i] = 2.5 * s[i] - 7.0;
  }
  CHECK(roc_auc(y, exp_s) == base);
  CHECK(roc_auc(y, affine_s) == base);
}

TEST_CASE("roc_auc complement identity without ties") {
  Rng rng(13);
  std::vector<int> y;
  std::vector<double> s;
  for (int i = 0; i < 101; ++i) {
    y.push_back(rng.uniform() < 0.5 ? 1 : 0);
    s.push_back(rng.uniform());  // continuous draws, ties have measure zero
  }
  y[0] = 0;
  y[1] = 1;
  std::vector<double> neg(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) neg[i] = -s[i];
  CHECK(roc_auc(y, s) + roc_auc(y, neg) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate thresholds probabilities at one half") {
  const EvalReport report = evaluate({1, 0, 1, 0}, {0.9, 0.2, 0.4, 0.6});
  CHECK(report.accuracy == 0.5);
  CHECK(report.n_test == 4);
  CHECK(report.class_balance == 0.5);
}
