#include "cascademl/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace cascademl {

void ScoredPredictions::validate() const {
  const auto n = truth.size();
  if (positive_probability.size() != n || predicted.size() != n)
    throw std::invalid_argument("ScoredPredictions: column lengths differ");
  if ((positive_probability.array() < 0.0).any() || (positive_probability.array() > 1.0).any())
    throw std::invalid_argument("ScoredPredictions: probability outside [0, 1]");
  if (member_correct.size() > 0 && member_correct.rows() != n)
    throw std::invalid_argument("ScoredPredictions: member matrix has the wrong number of rows");
}

ConfusionCounts confusion(const LabelVector& truth, const LabelVector& predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("confusion: length mismatch");
  ConfusionCounts c;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (truth(i) == 1) (predicted(i) == 1 ? c.tp : c.fn)++;
    else (predicted(i) == 1 ? c.fp : c.tn)++;
  }
  return c;
}

double accuracy(const LabelVector& truth, const LabelVector& predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (truth.size() == 0) throw std::invalid_argument("accuracy: no instances");
  return 100.0 * static_cast<double>((truth.array() == predicted.array()).count()) / static_cast<double>(truth.size());
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("accuracy: no instances");
  return 100.0 * static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

std::optional<double> sensitivity(const ConfusionCounts& c) {
  if (c.positives() == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.positives());
}

std::optional<double> specificity(const ConfusionCounts& c) {
  if (c.negatives() == 0) return std::nullopt;
  return static_cast<double>(c.tn) / static_cast<double>(c.negatives());
}

std::optional<double> roc_auc(const ScoreVector& scores, const LabelVector& truth) {
  if (scores.size() != truth.size()) throw std::invalid_argument("roc_auc: length mismatch");
  const auto n = scores.size();
  const auto positives = (truth.array() == 1).count();
  const auto negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores(a) < scores(b); });
  // Sum of positive mid-ranks (1-based), tie blocks share their mean rank.
  double rank_sum = 0.0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores(order[end]) == scores(order[start])) ++end;
    const double mid_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k)
      if (truth(order[k]) == 1) rank_sum += mid_rank;
    start = end;
  }
  const double p = static_cast<double>(positives);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

}  // namespace cascademl
