#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "finshap/game.hpp"

namespace finshap {

enum class AttributionMethod { Exact, Permutation, Kernel, Partition };

std::string to_string(AttributionMethod method);
AttributionMethod attribution_method_from_string(const std::string& name);

struct ShapleyResult {
  std::vector<double> phi;  // per player, or per group for Partition
  std::optional<std::vector<double>> std_errors;
  AttributionMethod method = AttributionMethod::Exact;
  std::uint64_t evaluations_used = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// Full 2^M enumeration of the Shapley formula with a dense memoized value
// table. Throws ConfigError above the cap, pointing at the sampling methods.
ShapleyResult exact_shapley(const CoalitionGame& game, std::size_t exact_cap = 20);

// Uniform random player orderings; each permutation walks its prefix chain
// and credits marginal contributions. Deterministic in seed (per-permutation
// sub-seeds are derived by index).
ShapleyResult sampled_shapley(const CoalitionGame& game, std::size_t n_permutations,
                              std::uint64_t seed);

// Full enumeration of the 2^M - 2 proper coalitions for kernel_shap.
inline constexpr std::int64_t kAllCoalitions = -1;

// Weighted least squares over sampled coalitions with Shapley-kernel weights;
// the efficiency constraint is eliminated analytically, so sum(phi) equals
// v(N) - v(empty) by construction. The budget counts every game evaluation,
// including v(empty) and v(N). Sampling enumerates complete coalition sizes
// from the extremes and fills the remaining budget with paired draws.
ShapleyResult kernel_shap(const CoalitionGame& game, std::int64_t n_coalitions,
                          std::uint64_t seed, double regularization = 1e-10);

// Exact Shapley values of the quotient game induced by a fixed partition:
// a group-coalition T maps to the union of its groups' members.
ShapleyResult partition_shapley(const CoalitionGame& game, const Partition& partition,
                                std::size_t exact_cap = 20);

}  // namespace finshap
