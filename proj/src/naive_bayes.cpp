#include <cmath>
#include <numbers>

#include "cascademl/learners.hpp"

namespace cascademl {

NaiveBayesModel train_naive_bayes(const DataTable& table, const NaiveBayesParams& params) {
  if (table.attributes() == 0) throw std::invalid_argument("naive_bayes: table has no attributes");
  NaiveBayesModel model;
  const Eigen::Array2d class_weight = table.class_weights();
  model.log_prior = ((class_weight + 1.0) / (class_weight.sum() + 2.0)).log();

  for (int j = 0; j < table.attributes(); ++j) {
    const auto& attr = table.schema()[j];
    NaiveBayesModel::AttributeModel am;
    am.nominal = attr.is_nominal();
    if (am.nominal) {
      Eigen::Array<double, 2, Eigen::Dynamic> counts = Eigen::Array<double, 2, Eigen::Dynamic>::Zero(2, attr.arity());
      for (int i = 0; i < table.rows(); ++i) {
        const double v = table.cell(i, j);
        if (!is_missing(v)) counts(table.label(i), static_cast<int>(v)) += table.weight(i);
      }
      const Eigen::Array2d totals = counts.rowwise().sum();
      am.log_likelihood.resize(2, attr.arity());
      for (int c = 0; c < 2; ++c)
        am.log_likelihood.row(c) = ((counts.row(c) + 1.0) / (totals(c) + attr.arity())).log();
    } else {
      Eigen::Array2d w = Eigen::Array2d::Zero(), sum = Eigen::Array2d::Zero();
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i = 0; i < table.rows(); ++i) {
        const double v = table.cell(i, j);
        if (is_missing(v)) continue;
        w(table.label(i)) += table.weight(i);
        sum(table.label(i)) += table.weight(i) * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double range = hi > lo ? hi - lo : 0.0;
      const double floor = std::max(params.variance_floor * range * range, 1e-12);
      const double pooled_mean = w.sum() > 0 ? sum.sum() / w.sum() : 0.0;
      Eigen::Array2d sq = Eigen::Array2d::Zero();
      double pooled_sq = 0.0;
      for (int c = 0; c < 2; ++c) am.mean(c) = w(c) > 0 ? sum(c) / w(c) : pooled_mean;
      for (int i = 0; i < table.rows(); ++i) {
        const double v = table.cell(i, j);
        if (is_missing(v)) continue;
        const int c = table.label(i);
        sq(c) += table.weight(i) * (v - am.mean(c)) * (v - am.mean(c));
        pooled_sq += table.weight(i) * (v - pooled_mean) * (v - pooled_mean);
      }
      const double pooled_var = w.sum() > 0 ? pooled_sq / w.sum() : 0.0;
      for (int c = 0; c < 2; ++c) am.variance(c) = std::max(w(c) > 0 ? sq(c) / w(c) : pooled_var, floor);
    }
    model.attributes.push_back(std::move(am));
  }
  return model;
}

Distribution predict_naive_bayes(const NaiveBayesModel& model, Instance instance) {
  Eigen::Array2d log_post = model.log_prior;
  for (std::size_t j = 0; j < model.attributes.size(); ++j) {
    const double v = instance[j];
    if (is_missing(v)) continue;
    const auto& am = model.attributes[j];
    if (am.nominal) {
      log_post += am.log_likelihood.col(static_cast<Eigen::Index>(v));
    } else {
      log_post += -0.5 * (2.0 * std::numbers::pi * am.variance).log() - (v - am.mean).square() / (2.0 * am.variance);
    }
  }
  const Eigen::Array2d p = (log_post - log_post.maxCoeff()).exp();
  return p / p.sum();
}

}  // namespace cascademl
