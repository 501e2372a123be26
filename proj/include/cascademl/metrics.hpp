#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>

namespace cascademl {

using LabelVector = Eigen::VectorXi;
using ScoreVector = Eigen::VectorXd;
/// instances x members; true where the member labels the instance correctly.
using CorrectnessMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct ConfusionCounts {
  long tp = 0, fn = 0, tn = 0, fp = 0;

  long positives() const noexcept { return tp + fn; }
  long negatives() const noexcept { return tn + fp; }
  long total() const noexcept { return positives() + negatives(); }
};

/// Per-instance outcome of scoring one model on a test set.
struct ScoredPredictions {
  LabelVector truth;
  ScoreVector positive_probability;
  LabelVector predicted;
  CorrectnessMatrix member_correct;  // empty unless the model is an ensemble

  /// Throws std::invalid_argument on inconsistent dimensions or probabilities outside [0, 1].
  void validate() const;
};

ConfusionCounts confusion(const LabelVector& truth, const LabelVector& predicted);

/// Percentage of matching labels. Throws on zero instances.
double accuracy(const LabelVector& truth, const LabelVector& predicted);
double accuracy(const ConfusionCounts& counts);
inline double accuracy(const ScoredPredictions& p) { return accuracy(p.truth, p.predicted); }

/// TP / P, or nullopt when there are no positives.
std::optional<double> sensitivity(const ConfusionCounts& counts);
/// TN / N, or nullopt when there are no negatives.
std::optional<double> specificity(const ConfusionCounts& counts);

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann-Whitney U / (P * N) with mid-ranks). nullopt when
/// either class is absent.
std::optional<double> roc_auc(const ScoreVector& scores, const LabelVector& truth);

template <typename Scores, typename Labels>
std::optional<double> roc_auc(const Eigen::DenseBase<Scores>& scores, const Eigen::DenseBase<Labels>& truth) {
  return roc_auc(ScoreVector(scores.derived().template cast<double>()), LabelVector(truth.derived().template cast<int>()));
}

inline std::optional<double> roc_auc(const ScoredPredictions& p) { return roc_auc(p.positive_probability, p.truth); }

/// Kohavi-Wolpert variance (Kuncheva & Whitaker, 2003):
///   KW = 1/(N L^2) * sum_j l_j (L - l_j)
/// with l_j the number of the L members misclassifying instance j.
/// Lies in [0, 1/4]; larger means more diverse. Throws when L < 2 or N < 1.
template <typename Derived>
double kw_variance(const Eigen::DenseBase<Derived>& correct) {
  const auto n = correct.rows();
  const auto members = correct.cols();
  if (members < 2) throw std::invalid_argument("kw_variance needs at least two members");
  if (n < 1) throw std::invalid_argument("kw_variance needs at least one instance");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto wrong = static_cast<double>(members - correct.row(j).count());
    sum += wrong * (static_cast<double>(members) - wrong);
  }
  return sum / (static_cast<double>(n) * static_cast<double>(members) * static_cast<double>(members));
}

/// Mean of the members' individual accuracies, in percent.
template <typename Derived>
double member_mean_accuracy(const Eigen::DenseBase<Derived>& correct) {
  if (correct.cols() < 1) throw std::invalid_argument("member_mean_accuracy needs at least one member");
  if (correct.rows() < 1) throw std::invalid_argument("member_mean_accuracy needs at least one instance");
  const double per_member_total = static_cast<double>(correct.count());
  return 100.0 * per_member_total / (static_cast<double>(correct.rows()) * static_cast<double>(correct.cols()));
}

}  // namespace cascademl
