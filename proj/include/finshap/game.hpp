#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "finshap/common.hpp"
#include "finshap/model.hpp"

namespace finshap {

// Subset of players 0..M-1 backed by a word array; O(1) membership updates.
class Coalition {
 public:
  Coalition() = default;
  explicit Coalition(std::size_t player_count)
      : words_((player_count + 63) / 64, 0), player_count_(player_count) {}

  static Coalition full(std::size_t player_count) {
    Coalition c(player_count);
    for (std::size_t i = 0; i < player_count; ++i) c.insert(i);
    return c;
  }

  // Low-order mask interpretation, players 0..63.
  static Coalition from_mask(std::size_t player_count, std::uint64_t mask) {
    Coalition c(player_count);
    if (!c.words_.empty()) {
      c.words_[0] = mask;
      c.size_ = static_cast<std::size_t>(__builtin_popcountll(mask));
    }
    return c;
  }

  std::size_t player_count() const { return player_count_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool contains(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

  void insert(std::size_t i) {
    std::uint64_t& w = words_[i >> 6];
    const std::uint64_t bit = 1ULL << (i & 63);
    if (!(w & bit)) {
      w |= bit;
      ++size_;
    }
  }

  void remove(std::size_t i) {
    std::uint64_t& w = words_[i >> 6];
    const std::uint64_t bit = 1ULL << (i & 63);
    if (w & bit) {
      w &= ~bit;
      --size_;
    }
  }

  void unite(const Coalition& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    recount();
  }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    out.reserve(size_);
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        out.push_back(w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits)));
        bits &= bits - 1;
      }
    }
    return out;
  }

  bool operator==(const Coalition& other) const {
    return player_count_ == other.player_count_ && words_ == other.words_;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  void recount() {
    size_ = 0;
    for (std::uint64_t w : words_) size_ += static_cast<std::size_t>(__builtin_popcountll(w));
  }

  std::vector<std::uint64_t> words_;
  std::size_t player_count_ = 0;
  std::size_t size_ = 0;
};

struct CoalitionHash {
  std::size_t operator()(const Coalition& c) const {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ c.player_count();
    for (std::uint64_t w : c.words()) {
      h ^= w;
      h *= 0x100000001b3ULL;
      h = splitmix64(h);
    }
    return static_cast<std::size_t>(h);
  }
};

// Characteristic function v over coalitions of M players. Values are memoized
// per coalition; the evaluation counter tracks underlying (uncached) calls.
// Safe to evaluate from concurrent workers.
class CoalitionGame {
 public:
  using ValueFn = std::function<double(const Coalition&)>;

  CoalitionGame(std::size_t players, ValueFn value)
      : players_(players), value_(std::move(value)) {}

  std::size_t players() const { return players_; }

  double value(const Coalition& s) const {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(s);
      if (it != cache_.end()) return it->second;
    }
    const double v = evaluate_uncached(s);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(s, v);
    return v;
  }

  // Counts the evaluation but bypasses the memo table; for enumerations that
  // keep their own dense value table.
  double evaluate_uncached(const Coalition& s) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    return value_(s);
  }

  std::uint64_t evaluations() const { return evaluations_.load(std::memory_order_relaxed); }

 private:
  std::size_t players_;
  ValueFn value_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<Coalition, double, CoalitionHash> cache_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

// Disjoint coalitions covering all players exactly.
class Partition {
 public:
  Partition(std::size_t player_count, std::vector<Coalition> groups);

  static Partition singletons(std::size_t player_count);

  std::size_t player_count() const { return player_count_; }
  const std::vector<Coalition>& groups() const { return groups_; }

 private:
  std::size_t player_count_;
  std::vector<Coalition> groups_;
};

enum class BaselineMode {
  MeanBackground,  // baseline = mean background prediction, so v(empty) = 0
  FixedHalf,       // baseline = 0.5, the random-classifier reading
};

// Batch class-probability functor: rows in, target-class probabilities out.
using ProbaFn = std::function<Vector(const Matrix&)>;

// Marginal-masking game: v(S) is the mean target-class probability over
// background rows with the explained instance's values substituted on S,
// centered at the baseline. The background is frozen at construction, so v is
// deterministic thereafter.
std::shared_ptr<CoalitionGame> masking_game(ProbaFn predict, const Vector& instance,
                                            const Matrix& background,
                                            BaselineMode baseline = BaselineMode::MeanBackground);

std::shared_ptr<CoalitionGame> masking_game(const Model& model, const Vector& instance,
                                            const Matrix& background, int target_class,
                                            BaselineMode baseline = BaselineMode::MeanBackground);

// B rows drawn uniformly without replacement (all rows, in order, if B >= n).
// This is the seeded step that freezes a masking game's background.
Matrix sample_background(const Matrix& train_X, std::size_t B, std::uint64_t seed);

}  // namespace finshap
