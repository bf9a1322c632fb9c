#pragma once

#include <vector>

#include "finshap/common.hpp"

namespace finshap {

struct EvalReport {
  double accuracy = 0.0;
  double roc_auc = 0.0;
  std::size_t n_test = 0;
  double class_balance = 0.0;  // fraction of positives in y_true
};

// Fraction of exact label matches.
double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Rank statistic: probability that a uniformly random positive outranks a
// uniformly random negative, ties counted one half. O(n log n).
double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores);

// Accuracy at the 0.5 probability threshold plus ROC-AUC on the raw scores.
EvalReport evaluate(const std::vector<int>& y_true, const std::vector<double>& scores);

}  // namespace finshap
