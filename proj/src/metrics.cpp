#include "finshap/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace finshap {

double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.empty()) throw DataError("accuracy: empty input");
  if (y_true.size() != y_pred.size()) throw ShapeError("accuracy: length mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == y_pred[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(y_true.size());
}

double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
  const std::size_t n = y_true.size();
  if (n == 0) throw DataError("roc_auc: empty input");
  if (scores.size() != n) throw ShapeError("roc_auc: length mismatch");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Doubled midranks stay integral, so tied groups contribute exactly 1/2 per
  // pair and the final ratio is a quotient of exact integers.
  std::vector<std::uint64_t> rank_x2(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const std::uint64_t doubled = static_cast<std::uint64_t>(i + j) + 2;  // 2 * mean 1-based rank
    for (std::size_t k = i; k <= j; ++k) rank_x2[order[k]] = doubled;
    i = j + 1;
  }

  std::uint64_t n_pos = 0;
  std::uint64_t rank_sum_x2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (y_true[k] == 1) {
      ++n_pos;
      rank_sum_x2 += rank_x2[k];
    }
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("roc_auc: undefined, y_true contains a single class");
  }
  const std::uint64_t u_x2 = rank_sum_x2 - n_pos * (n_pos + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

EvalReport evaluate(const std::vector<int>& y_true, const std::vector<double>& scores) {
  std::vector<int> pred(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) pred[i] = scores[i] >= 0.5 ? 1 : 0;
  EvalReport report;
  report.accuracy = accuracy(y_true, pred);
  report.roc_auc = roc_auc(y_true, scores);
  report.n_test = y_true.size();
  std::size_t pos = 0;
  for (int y : y_true) pos += (y == 1);
  report.class_balance = static_cast<double>(pos) / static_cast<double>(y_true.size());
  return report;
}

}  // namespace finshap
