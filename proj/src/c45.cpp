#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cascademl/learners.hpp"

namespace cascademl {

namespace {

double entropy_bits(const Eigen::Array2d& counts) {
  const double n = counts.sum();
  if (n <= 0) return 0.0;
  double h = 0.0;
  for (int c = 0; c < 2; ++c)
    if (counts(c) > 0) h -= counts(c) / n * std::log2(counts(c) / n);
  return h;
}

/// Entropy of branch sizes, in bits.
double split_entropy(std::span<const double> sizes) {
  const double n = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  if (n <= 0) return 0.0;
  double h = 0.0;
  for (double s : sizes)
    if (s > 0) h -= s / n * std::log2(s / n);
  return h;
}

/// Branch class counts for `split` over `rows`; the last branch collects missing values.
std::vector<Eigen::Array2d> branch_counts(const DataTable& table, std::span<const int> rows, int attribute,
                                          const Split& split) {
  const auto& attr = table.schema()[attribute];
  const int branches = split.threshold ? 2 : attr.arity();
  std::vector<Eigen::Array2d> counts(static_cast<std::size_t>(branches) + 1, Eigen::Array2d::Zero());
  for (int i : rows) {
    const double v = table.cell(i, attribute);
    int b;
    if (is_missing(v)) b = branches;
    else if (split.threshold) b = v <= *split.threshold ? 0 : 1;
    else b = static_cast<int>(v);
    counts[static_cast<std::size_t>(b)](table.label(i)) += table.weight(i);
  }
  return counts;
}

/// Known-value information gain scaled by the known fraction; split info
/// counts missing values as one extra branch.
SplitScore score_counts(const std::vector<Eigen::Array2d>& counts) {
  Eigen::Array2d known = Eigen::Array2d::Zero();
  for (std::size_t b = 0; b + 1 < counts.size(); ++b) known += counts[b];
  const double total = known.sum() + counts.back().sum();
  if (total <= 0 || known.sum() <= 0) return {};
  double remainder = 0.0;
  for (std::size_t b = 0; b + 1 < counts.size(); ++b)
    remainder += counts[b].sum() / known.sum() * entropy_bits(counts[b]);
  std::vector<double> sizes;
  for (const auto& c : counts) sizes.push_back(c.sum());
  return {known.sum() / total * (entropy_bits(known) - remainder), split_entropy(sizes)};
}

constexpr double kEps = 1e-9;

std::optional<double> ratio_if_eligible(const SplitScore& s, double mean_gain) {
  if (s.split_info <= kEps || s.gain < mean_gain - kEps) return std::nullopt;
  return s.gain / s.split_info;
}

double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Candidate {
  int attribute = -1;
  Split split;
  SplitScore score;
};

class TreeBuilder {
 public:
  TreeBuilder(const DataTable& table, const C45Params& params) : table_(table), params_(params) {}

  DecisionTree build() {
    std::vector<int> rows(static_cast<std::size_t>(table_.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<bool> used(static_cast<std::size_t>(table_.attributes()), false);
    grow(rows, used);
    return std::move(tree_);
  }

 private:
  Eigen::Array2d counts_of(std::span<const int> rows) const {
    Eigen::Array2d c = Eigen::Array2d::Zero();
    for (int i : rows) c(table_.label(i)) += table_.weight(i);
    return c;
  }

  std::optional<Candidate> best_numeric(std::span<const int> rows, int attribute) const {
    std::vector<int> known;
    Eigen::Array2d missing = Eigen::Array2d::Zero();
    for (int i : rows) {
      if (is_missing(table_.cell(i, attribute))) missing(table_.label(i)) += table_.weight(i);
      else known.push_back(i);
    }
    std::sort(known.begin(), known.end(), [&](int a, int b) {
      return table_.cell(a, attribute) < table_.cell(b, attribute);
    });
    const Eigen::Array2d total = counts_of(known);
    const double min_split = std::clamp(params_.numeric_split_fraction * total.sum() / 2.0,
                                        static_cast<double>(params_.min_objects),
                                        std::max(25.0, static_cast<double>(params_.min_objects)));
    Eigen::Array2d left = Eigen::Array2d::Zero();
    std::optional<Candidate> best;
    int thresholds = 0;
    for (std::size_t p = 0; p + 1 < known.size(); ++p) {
      left(table_.label(known[p])) += table_.weight(known[p]);
      const double v = table_.cell(known[p], attribute);
      const double next = table_.cell(known[p + 1], attribute);
      if (!(v < next)) continue;
      const Eigen::Array2d right = total - left;
      if (left.sum() < min_split || right.sum() < min_split) continue;
      ++thresholds;
      const auto score = score_counts({left, right, missing});
      if (!best || score.gain > best->score.gain + 1e-12)
        best = Candidate{attribute, Split::at(split_point(v, next)), score};
    }
    if (best && params_.mdl_correction) best->score.gain -= std::log2(thresholds) / (total.sum() + missing.sum());
    return best;
  }

  std::optional<Candidate> best_nominal(std::span<const int> rows, int attribute) const {
    const Split split = Split::multiway();
    const auto counts = branch_counts(table_, rows, attribute, split);
    int populated = 0;
    for (std::size_t b = 0; b + 1 < counts.size(); ++b)
      if (counts[b].sum() >= params_.min_objects) ++populated;
    if (populated < 2) return std::nullopt;
    return Candidate{attribute, split, score_counts(counts)};
  }

  int grow(const std::vector<int>& rows, std::vector<bool>& used_nominal) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    const Eigen::Array2d counts = counts_of(rows);
    tree_.nodes[id].counts = counts;
    if (counts.minCoeff() <= 0 || counts.sum() < 2.0 * params_.min_objects) return id;

    std::vector<Candidate> candidates;
    for (int j = 0; j < table_.attributes(); ++j) {
      const bool nominal = table_.schema()[j].is_nominal();
      if (nominal && used_nominal[j]) continue;
      auto c = nominal ? best_nominal(rows, j) : best_numeric(rows, j);
      if (c && c->score.gain > kEps) candidates.push_back(*c);
    }
    if (candidates.empty()) return id;
    double mean_gain = 0.0;
    for (const auto& c : candidates) mean_gain += c.score.gain;
    mean_gain /= static_cast<double>(candidates.size());

    const Candidate* chosen = nullptr;
    double best_ratio = -1.0;
    for (const auto& c : candidates) {
      const auto ratio = ratio_if_eligible(c.score, mean_gain);
      if (ratio && *ratio > best_ratio + 1e-12) {
        best_ratio = *ratio;
        chosen = &c;
      }
    }
    if (!chosen) return id;

    const int attribute = chosen->attribute;
    const Split split = chosen->split;
    const bool nominal = !split.threshold.has_value();
    const int branches = nominal ? table_.schema()[attribute].arity() : 2;
    std::vector<std::vector<int>> parts(static_cast<std::size_t>(branches));
    std::vector<double> part_weight(static_cast<std::size_t>(branches), 0.0);
    std::vector<int> missing_rows;
    for (int i : rows) {
      const double v = table_.cell(i, attribute);
      if (is_missing(v)) {
        missing_rows.push_back(i);
        continue;
      }
      const int b = nominal ? static_cast<int>(v) : (v <= *split.threshold ? 0 : 1);
      parts[static_cast<std::size_t>(b)].push_back(i);
      part_weight[static_cast<std::size_t>(b)] += table_.weight(i);
    }
    // Rows missing the split value follow the heaviest branch.
    const auto heaviest = std::max_element(part_weight.begin(), part_weight.end()) - part_weight.begin();
    parts[static_cast<std::size_t>(heaviest)].insert(parts[static_cast<std::size_t>(heaviest)].end(),
                                                      missing_rows.begin(), missing_rows.end());

    tree_.nodes[id].attribute = attribute;
    tree_.nodes[id].nominal = nominal;
    tree_.nodes[id].threshold = nominal ? 0.0 : *split.threshold;
    if (nominal) used_nominal[attribute] = true;
    std::vector<int> children;
    for (const auto& part : parts) {
      if (part.empty()) {
        children.push_back(static_cast<int>(tree_.nodes.size()));
        tree_.nodes.push_back(TreeNode{});
      } else {
        children.push_back(grow(part, used_nominal));
      }
    }
    if (nominal) used_nominal[attribute] = false;
    tree_.nodes[id].children = std::move(children);
    return id;
  }

  const DataTable& table_;
  const C45Params& params_;
  DecisionTree tree_;
};

double leaf_errors(const Eigen::Array2d& counts) { return counts.sum() - counts.maxCoeff(); }

double subtree_training_errors(const DecisionTree& tree, int id) {
  const auto& node = tree.nodes[id];
  if (node.is_leaf()) return leaf_errors(node.counts);
  double e = 0.0;
  for (int c : node.children) e += subtree_training_errors(tree, c);
  return e;
}

void collapse(DecisionTree& tree, int id) {
  auto& node = tree.nodes[id];
  if (node.is_leaf()) return;
  if (subtree_training_errors(tree, id) >= leaf_errors(node.counts) - 1e-3) {
    node.children.clear();
    node.attribute = -1;
    return;
  }
  for (int c : std::vector<int>(node.children)) collapse(tree, c);
}

double estimated_errors(const Eigen::Array2d& counts, double confidence) {
  const double e = leaf_errors(counts);
  return e + pessimistic_extra_errors(counts.sum(), e, confidence);
}

/// Subtree replacement, bottom-up. Returns the estimated errors of the result.
double prune(DecisionTree& tree, int id, double confidence) {
  if (tree.nodes[id].is_leaf()) return estimated_errors(tree.nodes[id].counts, confidence);
  double subtree = 0.0;
  for (int c : std::vector<int>(tree.nodes[id].children)) subtree += prune(tree, c, confidence);
  auto& node = tree.nodes[id];
  const double as_leaf = estimated_errors(node.counts, confidence);
  if (as_leaf <= subtree + 0.1) {
    node.children.clear();
    node.attribute = -1;
    return as_leaf;
  }
  return subtree;
}

int compact(const DecisionTree& from, int id, DecisionTree& to) {
  const int out = static_cast<int>(to.nodes.size());
  to.nodes.push_back(from.nodes[id]);
  std::vector<int> children;
  for (int c : from.nodes[id].children) children.push_back(compact(from, c, to));
  to.nodes[out].children = std::move(children);
  return out;
}

Distribution predict_from(const DecisionTree& tree, int id, const Eigen::Array2d& parent_counts, Instance instance) {
  const auto& node = tree.nodes[id];
  if (node.is_leaf()) return laplace(node.counts.sum() > 0 ? node.counts : parent_counts);
  const double v = instance[node.attribute];
  if (is_missing(v)) {
    Distribution mix = Distribution::Zero();
    double total = 0.0;
    for (int c : node.children) {
      const double w = tree.nodes[c].counts.sum();
      if (w <= 0) continue;
      mix += w * predict_from(tree, c, node.counts, instance);
      total += w;
    }
    return total > 0 ? Distribution(mix / total) : laplace(node.counts);
  }
  const std::size_t branch = node.nominal ? static_cast<std::size_t>(v) : (v <= node.threshold ? 0 : 1);
  return predict_from(tree, node.children[branch], node.counts, instance);
}

}  // namespace

SplitScore c45_split_score(const DataTable& table, std::span<const int> rows, int attribute, const Split& split) {
  if (attribute < 0 || attribute >= table.attributes()) throw std::out_of_range("c45: attribute index out of range");
  const bool nominal = table.schema()[attribute].is_nominal();
  if (nominal == split.threshold.has_value())
    throw std::invalid_argument("c45: nominal attributes split multiway, numeric ones at a threshold");
  return score_counts(branch_counts(table, rows, attribute, split));
}

std::optional<double> c45_gain_ratio(const DataTable& table, int attribute, const Split& split, double mean_gain) {
  std::vector<int> rows(static_cast<std::size_t>(table.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  return ratio_if_eligible(c45_split_score(table, rows, attribute, split), mean_gain);
}

double pessimistic_extra_errors(double n, double e, double confidence) {
  if (!(confidence > 0.0) || confidence > 0.5) throw std::invalid_argument("confidence factor must lie in (0, 0.5]");
  if (n <= 0) return 0.0;
  if (e < 1.0) {
    const double base = n * (1.0 - std::pow(confidence, 1.0 / n));
    if (e == 0.0) return base;
    return base + e * (pessimistic_extra_errors(n, 1.0, confidence) - base);
  }
  if (e + 0.5 >= n) return std::max(n - e, 0.0);
  const double z = normal_quantile(1.0 - confidence);
  const double f = (e + 0.5) / n;
  const double r = (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n);
  return r * n - e;
}

DecisionTree train_c45(const DataTable& table, const C45Params& params) {
  if (table.attributes() == 0) throw std::invalid_argument("c45: table has no attributes");
  DecisionTree tree = TreeBuilder(table, params).build();
  if (params.collapse) collapse(tree, 0);
  if (params.prune) prune(tree, 0, params.confidence);
  DecisionTree out;
  compact(tree, 0, out);
  return out;
}

Distribution predict_c45(const DecisionTree& tree, Instance instance) {
  return predict_from(tree, 0, tree.nodes[0].counts, instance);
}

int DecisionTree::depth() const {
  auto rec = [this](auto&& self, int id) -> int {
    int d = 0;
    for (int c : nodes[id].children) d = std::max(d, 1 + self(self, c));
    return d;
  };
  return nodes.empty() ? 0 : rec(rec, 0);
}

int DecisionTree::leaves() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

}  // namespace cascademl
