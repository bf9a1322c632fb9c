#include "finshap/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace finshap {

std::string to_string(AttributionMethod method) {
  switch (method) {
    case AttributionMethod::Exact: return "exact";
    case AttributionMethod::Permutation: return "permutation";
    case AttributionMethod::Kernel: return "kernel";
    case AttributionMethod::Partition: return "partition";
  }
  return "unknown";
}

AttributionMethod attribution_method_from_string(const std::string& name) {
  if (name == "exact") return AttributionMethod::Exact;
  if (name == "permutation") return AttributionMethod::Permutation;
  if (name == "kernel") return AttributionMethod::Kernel;
  if (name == "partition") return AttributionMethod::Partition;
  throw ConfigError("unknown attribution method: " + name);
}

nlohmann::json ShapleyResult::to_json() const {
  nlohmann::json doc;
  doc["method"] = to_string(method);
  doc["phi"] = phi;
  if (std_errors) doc["stderr"] = *std_errors;
  doc["evaluations_used"] = evaluations_used;
  doc["seed"] = seed;
  return doc;
}

namespace {

// Pascal triangle; exact in double for n <= 20.
std::vector<std::vector<double>> binomial_table(std::size_t n) {
  std::vector<std::vector<double>> c(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    c[i].assign(i + 1, 1.0);
    for (std::size_t j = 1; j < i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
  }
  return c;
}

// C(n, k) clamped at cap to sidestep overflow; only used for budget checks.
std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double v = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) {
    v *= static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (v > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(v + 0.5L);
}

}  // namespace

ShapleyResult exact_shapley(const CoalitionGame& game, std::size_t exact_cap) {
  const std::size_t M = game.players();
  if (M == 0) throw ConfigError("exact_shapley: game has no players");
  if (M > exact_cap || M > 63) {
    throw ConfigError("exact_shapley: 2^" + std::to_string(M) +
                      " coalitions exceed the cap of 2^" + std::to_string(exact_cap) +
                      "; use sampled_shapley or kernel_shap");
  }
  const std::uint64_t evals_before = game.evaluations();
  const std::uint64_t n_masks = 1ULL << M;

  std::vector<double> values(n_masks);
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    values[mask] = game.evaluate_uncached(Coalition::from_mask(M, mask));
  }

  // Per-player, per-coalition-size marginal sums. Folding the size weight in
  // once per size keeps additive games exact and improves accuracy generally.
  std::vector<std::vector<double>> acc(M, std::vector<double>(M, 0.0));
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    const auto s = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (s == M) continue;
    for (std::size_t i = 0; i < M; ++i) {
      const std::uint64_t bit = 1ULL << i;
      if (mask & bit) continue;
      acc[i][s] += values[mask | bit] - values[mask];
    }
  }

  const auto binom = binomial_table(M == 1 ? 1 : M - 1);
  ShapleyResult result;
  result.method = AttributionMethod::Exact;
  result.phi.assign(M, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    double total = 0.0;
    for (std::size_t s = 0; s < M; ++s) total += acc[i][s] / binom[M - 1][s];
    result.phi[i] = total / static_cast<double>(M);
  }
  result.evaluations_used = game.evaluations() - evals_before;
  return result;
}

ShapleyResult sampled_shapley(const CoalitionGame& game, std::size_t n_permutations,
                              std::uint64_t seed) {
  const std::size_t M = game.players();
  if (M == 0) throw ConfigError("sampled_shapley: game has no players");
  if (n_permutations < 1) throw ConfigError("sampled_shapley: n_permutations must be >= 1");
  const std::uint64_t evals_before = game.evaluations();

  std::vector<std::size_t> order(M);
  std::vector<double> mean(M, 0.0);
  std::vector<double> m2(M, 0.0);
  const Coalition empty(M);
  const double v_empty = game.value(empty);

  for (std::size_t k = 0; k < n_permutations; ++k) {
    Rng rng(derive_seed(seed, "permutation", k));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    Coalition prefix(M);
    double prev = v_empty;
    for (std::size_t player : order) {
      prefix.insert(player);
      const double cur = game.value(prefix);
      const double marginal = cur - prev;
      prev = cur;
      const double delta = marginal - mean[player];
      mean[player] += delta / static_cast<double>(k + 1);
      m2[player] += delta * (marginal - mean[player]);
    }
  }

  ShapleyResult result;
  result.method = AttributionMethod::Permutation;
  result.seed = seed;
  result.phi = mean;
  if (n_permutations >= 2) {
    std::vector<double> se(M);
    const double k = static_cast<double>(n_permutations);
    for (std::size_t i = 0; i < M; ++i) se[i] = std::sqrt(m2[i] / (k - 1.0) / k);
    result.std_errors = std::move(se);
  }
  result.evaluations_used = game.evaluations() - evals_before;
  return result;
}

namespace {

// One weighted design row of the constrained kernel regression, with the last
// player eliminated: regress y - z_last * delta on (z_i - z_last).
struct KernelAccumulator {
  explicit KernelAccumulator(std::size_t m)
      : dim(m - 1), gram(Eigen::MatrixXd::Zero(dim, dim)), rhs(Eigen::VectorXd::Zero(dim)) {}

  void add(const Coalition& s, double weight, double y, double delta) {
    const bool has_last = s.contains(dim);
    const double target = y - (has_last ? delta : 0.0);
    // Nonzeros of the eliminated-row representation: z_i - z_last.
    nz_idx.clear();
    nz_val.clear();
    if (!has_last) {
      for (std::size_t i : s.members()) {
        nz_idx.push_back(i);
        nz_val.push_back(1.0);
      }
    } else {
      // z_last = 1: entries are z_i - 1, nonzero exactly off the coalition.
      std::size_t prev = 0;
      for (std::size_t i : s.members()) {
        for (std::size_t j = prev; j < i && j < dim; ++j) {
          nz_idx.push_back(j);
          nz_val.push_back(-1.0);
        }
        prev = i + 1;
      }
      for (std::size_t j = prev; j < dim; ++j) {
        nz_idx.push_back(j);
        nz_val.push_back(-1.0);
      }
    }
    for (std::size_t a = 0; a < nz_idx.size(); ++a) {
      const double wa = weight * nz_val[a];
      rhs[static_cast<Eigen::Index>(nz_idx[a])] += wa * target;
      for (std::size_t b = 0; b < nz_idx.size(); ++b) {
        gram(static_cast<Eigen::Index>(nz_idx[a]), static_cast<Eigen::Index>(nz_idx[b])) +=
            wa * nz_val[b];
      }
    }
  }

  std::size_t dim;
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  std::vector<std::size_t> nz_idx;
  std::vector<double> nz_val;
};

// Visits every coalition of the given size in lexicographic order.
template <typename Fn>
void for_each_combination(std::size_t m, std::size_t size, Fn&& fn) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (;;) {
    fn(idx);
    std::size_t i = size;
    while (i > 0) {
      --i;
      if (idx[i] != i + m - size) break;
      if (i == 0) return;
    }
    ++idx[i];
    for (std::size_t j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
}

Coalition coalition_of(std::size_t m, const std::vector<std::size_t>& members) {
  Coalition c(m);
  for (std::size_t i : members) c.insert(i);
  return c;
}

}  // namespace

ShapleyResult kernel_shap(const CoalitionGame& game, std::int64_t n_coalitions,
                          std::uint64_t seed, double regularization) {
  const std::size_t M = game.players();
  if (M == 0) throw ConfigError("kernel_shap: game has no players");
  const bool full = n_coalitions == kAllCoalitions;
  if (full && M > 20) {
    throw ConfigError("kernel_shap: full enumeration is limited to M <= 20 players");
  }
  if (!full && n_coalitions < static_cast<std::int64_t>(2 * M)) {
    throw ConfigError("kernel_shap: budget must be at least 2M (or kAllCoalitions)");
  }

  const std::uint64_t evals_before = game.evaluations();
  const double v_empty = game.value(Coalition(M));
  const double v_full = game.value(Coalition::full(M));
  const double delta = v_full - v_empty;

  ShapleyResult result;
  result.method = AttributionMethod::Kernel;
  result.seed = seed;
  if (M == 1) {
    result.phi = {delta};
    result.evaluations_used = game.evaluations() - evals_before;
    return result;
  }

  // Normalized mass per coalition size: m(s) = (M-1)/(s(M-s)), which already
  // aggregates the Shapley kernel over the C(M,s) coalitions of size s.
  std::vector<double> size_mass(M, 0.0);
  double total_mass = 0.0;
  for (std::size_t s = 1; s <= M - 1; ++s) {
    size_mass[s] = static_cast<double>(M - 1) / (static_cast<double>(s) * static_cast<double>(M - s));
    total_mass += size_mass[s];
  }
  for (std::size_t s = 1; s <= M - 1; ++s) size_mass[s] /= total_mass;

  std::uint64_t budget = full ? std::numeric_limits<std::uint64_t>::max()
                              : static_cast<std::uint64_t>(n_coalitions) - 2;

  KernelAccumulator acc(M);
  std::vector<bool> enumerated(M, false);

  // Enumerate complete sizes from the extremes while the pair fits.
  for (std::size_t s = 1; 2 * s <= M; ++s) {
    const std::size_t s_hi = M - s;
    if (s_hi < 1 || s > s_hi) break;
    std::uint64_t count = binomial_capped(M, s, budget);
    if (s_hi != s) {
      const std::uint64_t other = binomial_capped(M, s_hi, budget);
      if (count > budget || other > budget - count) {
        count = budget + 1;  // pair does not fit
      } else {
        count += other;
      }
    }
    if (count > budget) break;
    for (std::size_t size : (s_hi == s ? std::vector<std::size_t>{s}
                                       : std::vector<std::size_t>{s, s_hi})) {
      const double per_coalition = size_mass[size] / static_cast<double>(binomial_capped(
                                       M, size, std::numeric_limits<std::uint64_t>::max() - 1));
      for_each_combination(M, size, [&](const std::vector<std::size_t>& members) {
        const Coalition c = coalition_of(M, members);
        acc.add(c, per_coalition, game.value(c) - v_empty, delta);
      });
      enumerated[size] = true;
    }
    budget -= count;
  }

  // Fill what is left of the budget with paired random draws from the
  // remaining sizes, merging duplicates by frequency.
  double mass_left = 0.0;
  std::vector<double> leftover_cdf;
  std::vector<std::size_t> leftover_sizes;
  for (std::size_t s = 1; s <= M - 1; ++s) {
    if (!enumerated[s]) {
      mass_left += size_mass[s];
      leftover_sizes.push_back(s);
      leftover_cdf.push_back(mass_left);
    }
  }
  if (!leftover_sizes.empty() && budget > 0 && mass_left > 0.0) {
    Rng rng(derive_seed(seed, "kernel_coalitions"));
    std::vector<Coalition> sampled;
    std::vector<double> counts;
    std::unordered_map<Coalition, std::size_t, CoalitionHash> index_of;
    std::uint64_t n_draws = 0;

    auto add_sample = [&](const Coalition& c) {
      auto [it, inserted] = index_of.emplace(c, sampled.size());
      if (inserted) {
        sampled.push_back(c);
        counts.push_back(1.0);
      } else {
        counts[it->second] += 1.0;
      }
      ++n_draws;
    };

    while (budget > 0) {
      const double u = rng.uniform() * mass_left;
      std::size_t pick = leftover_sizes.size() - 1;
      for (std::size_t j = 0; j < leftover_cdf.size(); ++j) {
        if (u < leftover_cdf[j]) {
          pick = j;
          break;
        }
      }
      const std::size_t size = leftover_sizes[pick];
      const auto members = rng.sample_without_replacement(M, size);
      Coalition c = coalition_of(M, members);
      add_sample(c);
      --budget;
      if (budget > 0) {
        Coalition comp = Coalition::full(M);
        for (std::size_t i : members) comp.remove(i);
        add_sample(comp);
        --budget;
      }
    }

    const double scale = mass_left / static_cast<double>(n_draws);
    for (std::size_t j = 0; j < sampled.size(); ++j) {
      acc.add(sampled[j], counts[j] * scale, game.value(sampled[j]) - v_empty, delta);
    }
  }

  Eigen::MatrixXd gram = acc.gram;
  gram.diagonal().array() += regularization;
  Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  Eigen::VectorXd x;
  if (solver.info() == Eigen::Success) x = solver.solve(acc.rhs);
  if (solver.info() != Eigen::Success || !x.allFinite()) {
    throw NumericalError("kernel_shap: singular weighted least-squares system (M=" +
                         std::to_string(M) + ", regularization=" + std::to_string(regularization) +
                         "); increase the budget or the ridge term");
  }

  result.phi.assign(M, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < M; ++i) {
    result.phi[i] = x[static_cast<Eigen::Index>(i)];
    sum += result.phi[i];
  }
  result.phi[M - 1] = delta - sum;
  result.evaluations_used = game.evaluations() - evals_before;
  return result;
}

ShapleyResult partition_shapley(const CoalitionGame& game, const Partition& partition,
                                std::size_t exact_cap) {
  if (partition.player_count() != game.players()) {
    throw DataError("partition_shapley: partition covers " +
                    std::to_string(partition.player_count()) + " players, game has " +
                    std::to_string(game.players()));
  }
  const auto& groups = partition.groups();
  if (groups.size() > exact_cap) {
    throw ConfigError("partition_shapley: " + std::to_string(groups.size()) +
                      " groups exceed the exact cap of " + std::to_string(exact_cap));
  }
  const std::uint64_t evals_before = game.evaluations();

  // Quotient game: a coalition of groups plays as the union of its members.
  CoalitionGame quotient(groups.size(), [&](const Coalition& t) {
    Coalition members(game.players());
    for (std::size_t g : t.members()) members.unite(groups[g]);
    return game.value(members);
  });

  ShapleyResult result = exact_shapley(quotient, exact_cap);
  result.method = AttributionMethod::Partition;
  result.evaluations_used = game.evaluations() - evals_before;
  return result;
}

}  // namespace finshap
