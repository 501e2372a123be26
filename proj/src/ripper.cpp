#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cascademl/learners.hpp"

namespace cascademl {

bool Condition::matches(Instance instance) const noexcept {
  const double v = instance[static_cast<std::size_t>(attribute)];
  if (is_missing(v)) return false;
  switch (op) {
    case Op::equals: return v == value;
    case Op::less_equal: return v <= value;
    case Op::greater_equal: return v >= value;
  }
  return false;
}

bool Rule::covers(Instance instance) const noexcept {
  return std::all_of(conditions.begin(), conditions.end(), [&](const Condition& c) { return c.matches(instance); });
}

namespace {

using Rows = std::vector<int>;

/// Bits to identify `k` elements of a `t`-element set when each is picked with probability `p`.
double subset_bits(double t, double k, double p) {
  double bits = 0.0;
  if (k > 0) bits -= k * std::log2(p);
  if (t - k > 0) bits -= (t - k) * std::log2(1.0 - p);
  return bits;
}

/// Coverage statistics of a rule set over some rows (all rules predict the target).
struct Stats {
  double cover = 0, uncover = 0, fp = 0, fn = 0;
};

class RipperLearner {
 public:
  RipperLearner(const DataTable& table, int target, const RipperParams& params, Seed seed)
      : table_(table), target_(target), params_(params), rng_(seed) {
    // Possible conditions: one per nominal value, two per distinct numeric value.
    for (int j = 0; j < table.attributes(); ++j) {
      if (table.schema()[j].is_nominal()) {
        possible_conditions_ += table.schema()[j].arity();
      } else {
        std::set<double> distinct;
        for (int i = 0; i < table.rows(); ++i)
          if (!is_missing(table.cell(i, j))) distinct.insert(table.cell(i, j));
        possible_conditions_ += 2.0 * static_cast<double>(distinct.size());
      }
    }
    possible_conditions_ = std::max(possible_conditions_, 1.0);
  }

  std::vector<Rule> run() {
    Rows all(static_cast<std::size_t>(table_.rows()));
    std::iota(all.begin(), all.end(), 0);
    std::vector<Rule> rules;
    build(all, rules);
    for (int round = 0; round < params_.optimizations; ++round) {
      optimize(rules);
      build(uncovered(rules, all), rules);
      reduce_description_length(rules);
    }
    if (params_.optimizations == 0) reduce_description_length(rules);
    return rules;
  }

 private:
  bool is_target(int row) const { return table_.label(row) == target_; }

  double positive_weight(const Rows& rows) const {
    double w = 0;
    for (int i : rows)
      if (is_target(i)) w += table_.weight(i);
    return w;
  }

  Rows covered_by(const Rule& rule, const Rows& rows) const {
    Rows out;
    for (int i : rows)
      if (rule.covers(table_.row(i))) out.push_back(i);
    return out;
  }

  Rows uncovered(const std::vector<Rule>& rules, const Rows& rows) const {
    Rows out;
    for (int i : rows) {
      const auto r = table_.row(i);
      if (std::none_of(rules.begin(), rules.end(), [&](const Rule& rule) { return rule.covers(r); })) out.push_back(i);
    }
    return out;
  }

  /// Stratified random split into (grow, prune); prune gets 1/folds of each class.
  std::pair<Rows, Rows> split(const Rows& rows) {
    if (!params_.prune || params_.folds < 2 || positive_weight(rows) < 2.0) return {rows, {}};
    Rows grow, prune;
    for (bool target : {true, false}) {
      Rows members;
      for (int i : rows)
        if (is_target(i) == target) members.push_back(i);
      rng_.shuffle(std::span<int>(members));
      const std::size_t held = members.size() / static_cast<std::size_t>(params_.folds);
      prune.insert(prune.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(held));
      grow.insert(grow.end(), members.begin() + static_cast<std::ptrdiff_t>(held), members.end());
    }
    std::sort(grow.begin(), grow.end());
    std::sort(prune.begin(), prune.end());
    return {grow, prune};
  }

  /// FOIL gain with add-one smoothing of both accuracy rates.
  static double foil_gain(double p1, double t1, double p0, double t0) {
    return p1 * (std::log2((p1 + 1.0) / (t1 + 1.0)) - std::log2((p0 + 1.0) / (t0 + 1.0)));
  }

  /// Greedily specializes `rule` on `grow` until it covers no negatives or no
  /// condition has positive gain.
  Rule grow_rule(Rule rule, const Rows& grow) const {
    Rows covered = covered_by(rule, grow);
    while (true) {
      double p0 = 0, t0 = 0;
      for (int i : covered) {
        t0 += table_.weight(i);
        if (is_target(i)) p0 += table_.weight(i);
      }
      if (t0 - p0 <= 0) break;

      double best_gain = 0.0;
      std::optional<Condition> best;
      auto consider = [&](const Condition& c, double p1, double t1) {
        if (p1 < params_.min_coverage) return;
        const double g = foil_gain(p1, t1, p0, t0);
        if (g > best_gain + 1e-12) {
          best_gain = g;
          best = c;
        }
      };
      for (int j = 0; j < table_.attributes(); ++j) {
        const auto& attr = table_.schema()[j];
        if (attr.is_nominal()) {
          const bool used = std::any_of(rule.conditions.begin(), rule.conditions.end(),
                                        [&](const Condition& c) { return c.attribute == j; });
          if (used) continue;
          Eigen::ArrayXd p = Eigen::ArrayXd::Zero(attr.arity()), t = Eigen::ArrayXd::Zero(attr.arity());
          for (int i : covered) {
            const double v = table_.cell(i, j);
            if (is_missing(v)) continue;
            t(static_cast<Eigen::Index>(v)) += table_.weight(i);
            if (is_target(i)) p(static_cast<Eigen::Index>(v)) += table_.weight(i);
          }
          for (int v = 0; v < attr.arity(); ++v) consider({j, Condition::Op::equals, double(v)}, p(v), t(v));
        } else {
          Rows known;
          for (int i : covered)
            if (!is_missing(table_.cell(i, j))) known.push_back(i);
          std::sort(known.begin(), known.end(), [&](int a, int b) { return table_.cell(a, j) < table_.cell(b, j); });
          double p_all = 0, t_all = 0;
          for (int i : known) {
            t_all += table_.weight(i);
            if (is_target(i)) p_all += table_.weight(i);
          }
          double p_left = 0, t_left = 0;
          for (std::size_t k = 0; k + 1 < known.size(); ++k) {
            t_left += table_.weight(known[k]);
            if (is_target(known[k])) p_left += table_.weight(known[k]);
            const double v = table_.cell(known[k], j), next = table_.cell(known[k + 1], j);
            if (!(v < next)) continue;
            const double mid = split_point(v, next);
            consider({j, Condition::Op::less_equal, mid}, p_left, t_left);
            // >= needs a cut in (v, next]
            consider({j, Condition::Op::greater_equal, mid > v ? mid : next}, p_all - p_left, t_all - t_left);
          }
        }
      }
      if (!best) break;
      Rows next;
      for (int i : covered)
        if (best->matches(table_.row(i))) next.push_back(i);
      if (next.size() == covered.size()) break;  // no progress; cannot loop
      rule.conditions.push_back(*best);
      covered = std::move(next);
    }
    return rule;
  }

  /// Keeps the prefix of conditions maximizing (p - n) / (p + n) on `prune`;
  /// uncovered prefixes score 0, ties go to the shorter prefix.
  Rule prune_rule(Rule rule, const Rows& prune) const {
    if (prune.empty() || rule.conditions.size() <= 1) return rule;
    std::size_t best_len = rule.conditions.size();
    double best_value = -std::numeric_limits<double>::infinity();
    bool any_covered = false;
    Rows covered = prune;
    for (std::size_t len = 1; len <= rule.conditions.size(); ++len) {
      Rows next;
      for (int i : covered)
        if (rule.conditions[len - 1].matches(table_.row(i))) next.push_back(i);
      covered = std::move(next);
      double p = 0, n = 0;
      for (int i : covered) (is_target(i) ? p : n) += table_.weight(i);
      any_covered = any_covered || p + n > 0;
      const double value = p + n > 0 ? (p - n) / (p + n) : 0.0;
      if (value > best_value + 1e-12) {
        best_value = value;
        best_len = len;
      }
    }
    if (any_covered) rule.conditions.resize(best_len);
    return rule;
  }

  /// Keeps the prefix minimizing the error of the whole rule set on `prune`
  /// when this rule sits at `slot`.
  Rule prune_in_context(Rule rule, const std::vector<Rule>& rules, std::size_t slot, const Rows& prune) const {
    if (prune.empty() || rule.conditions.size() <= 1) return rule;
    const Rule full = rule;
    std::size_t best_len = rule.conditions.size();
    double best_error = std::numeric_limits<double>::infinity();
    std::vector<Rule> trial = rules;
    for (std::size_t len = 1; len <= full.conditions.size(); ++len) {
      trial[slot].conditions.assign(full.conditions.begin(), full.conditions.begin() + static_cast<std::ptrdiff_t>(len));
      const Stats s = stats(trial, prune);
      if (s.fp + s.fn < best_error - 1e-12) {
        best_error = s.fp + s.fn;
        best_len = len;
      }
    }
    rule.conditions.resize(best_len);
    return rule;
  }

  Stats stats(const std::vector<Rule>& rules, const Rows& rows) const {
    Stats s;
    for (int i : rows) {
      const auto r = table_.row(i);
      const bool hit = std::any_of(rules.begin(), rules.end(), [&](const Rule& rule) { return rule.covers(r); });
      const double w = table_.weight(i);
      if (hit) {
        s.cover += w;
        if (!is_target(i)) s.fp += w;
      } else {
        s.uncover += w;
        if (is_target(i)) s.fn += w;
      }
    }
    return s;
  }

  /// Theory bits of one rule: a universal code for its length plus the
  /// choice of its conditions among all possible ones, weighted by 1/2.
  double theory_bits(const Rule& rule) const {
    const double k = static_cast<double>(rule.conditions.size());
    if (k == 0) return 0.0;
    double bits = std::log2(k);
    if (k > 1) bits += 2.0 * std::log2(bits);
    bits += subset_bits(possible_conditions_, k, k / possible_conditions_);
    return 0.5 * bits;
  }

  /// Exception bits: which covered rows are false positives and which
  /// uncovered rows are false negatives, each at its empirical rate.
  static double data_bits(const Stats& s) {
    double bits = std::log2(s.cover + s.uncover + 1.0);
    if (s.cover > 0) bits += subset_bits(s.cover, s.fp, s.fp / s.cover);
    if (s.uncover > 0) bits += subset_bits(s.uncover, s.fn, s.fn / s.uncover);
    return bits;
  }

  double description_length(const std::vector<Rule>& rules) const {
    Rows all(static_cast<std::size_t>(table_.rows()));
    std::iota(all.begin(), all.end(), 0);
    double bits = data_bits(stats(rules, all));
    for (const auto& r : rules) bits += theory_bits(r);
    return bits;
  }

  /// Adds rules until the remaining positives are covered, a rule errs too
  /// often on its pruning data, or the DL grows past the best by the slack.
  void build(Rows remaining, std::vector<Rule>& rules) {
    double best_dl = description_length(rules);
    while (positive_weight(remaining) > 0) {
      auto [grow, prune] = split(remaining);
      Rule rule;
      rule.consequent = target_;
      rule = grow_rule(std::move(rule), grow);
      if (rule.conditions.empty()) break;
      if (params_.prune) rule = prune_rule(std::move(rule), prune);

      double p = 0, n = 0;
      for (int i : covered_by(rule, prune.empty() ? grow : prune)) (is_target(i) ? p : n) += table_.weight(i);
      if (p + n > 0 && n / (p + n) > params_.max_error_rate) break;

      rules.push_back(rule);
      const double dl = description_length(rules);
      best_dl = std::min(best_dl, dl);
      Rows next;
      for (int i : remaining)
        if (!rule.covers(table_.row(i))) next.push_back(i);
      remaining = std::move(next);
      if (dl > best_dl + params_.dl_slack_bits) break;
    }
  }

  /// Replacement and revision of each rule; the variant with the smallest
  /// rule-set DL wins, ties keep the original.
  void optimize(std::vector<Rule>& rules) {
    Rows all(static_cast<std::size_t>(table_.rows()));
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t slot = 0; slot < rules.size(); ++slot) {
      const std::vector<Rule> earlier(rules.begin(), rules.begin() + static_cast<std::ptrdiff_t>(slot));
      const Rows data = uncovered(earlier, all);
      if (positive_weight(data) <= 0) continue;
      auto [grow, prune] = split(data);

      Rule fresh;
      fresh.consequent = target_;
      std::vector<Rule> variants;
      if (Rule r = grow_rule(fresh, grow); !r.conditions.empty())
        variants.push_back(params_.prune ? prune_in_context(std::move(r), rules, slot, prune) : std::move(r));
      if (Rule r = grow_rule(rules[slot], grow); r.conditions.size() > rules[slot].conditions.size())
        variants.push_back(params_.prune ? prune_in_context(std::move(r), rules, slot, prune) : std::move(r));

      double best = description_length(rules);
      std::optional<Rule> winner;
      for (auto& v : variants) {
        std::vector<Rule> trial = rules;
        trial[slot] = v;
        const double dl = description_length(trial);
        if (dl < best - 1e-9) {
          best = dl;
          winner = std::move(v);
        }
      }
      if (winner) rules[slot] = std::move(*winner);
    }
  }

  /// Deletes rules, last first, whenever that lowers the description length.
  void reduce_description_length(std::vector<Rule>& rules) const {
    double current = description_length(rules);
    for (std::size_t k = rules.size(); k-- > 0;) {
      std::vector<Rule> trial = rules;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
      const double dl = description_length(trial);
      if (dl < current - 1e-9) {
        rules = std::move(trial);
        current = dl;
      }
    }
  }

  const DataTable& table_;
  int target_;
  const RipperParams& params_;
  Rng rng_;
  double possible_conditions_ = 0.0;
};

void assign_coverage(const DataTable& table, RuleList& list) {
  for (auto& r : list.rules) r.coverage.setZero();
  list.default_coverage.setZero();
  for (int i = 0; i < table.rows(); ++i) {
    const auto row = table.row(i);
    auto it = std::find_if(list.rules.begin(), list.rules.end(), [&](const Rule& r) { return r.covers(row); });
    (it == list.rules.end() ? list.default_coverage : it->coverage)(table.label(i)) += table.weight(i);
  }
}

}  // namespace

RuleList ripper_grow_prune(const DataTable& table, int target_class, Seed seed, const RipperParams& params) {
  if (target_class != kNegative && target_class != kPositive)
    throw std::invalid_argument("ripper: target class must be 0 or 1");
  if (table.attributes() == 0) throw std::invalid_argument("ripper: table has no attributes");
  RuleList list;
  list.default_class = 1 - target_class;
  if (table.class_weights()(target_class) > 0) list.rules = RipperLearner(table, target_class, params, seed).run();
  if (list.rules.empty()) {
    const Eigen::Array2d w = table.class_weights();
    list.default_class = w(target_class) > w(1 - target_class) ? target_class : 1 - target_class;
  }
  assign_coverage(table, list);
  return list;
}

RuleList train_ripper(const DataTable& table, const RipperParams& params, Seed seed) {
  const Eigen::Array2d w = table.class_weights();
  // Rules describe the rarer class; on a tie, the positive one.
  const int target = w(kNegative) < w(kPositive) ? kNegative : kPositive;
  return ripper_grow_prune(table, target, seed, params);
}

Distribution predict_ripper(const RuleList& list, Instance instance) {
  for (const auto& r : list.rules)
    if (r.covers(instance)) return laplace(r.coverage);
  return laplace(list.default_coverage);
}

}  // namespace cascademl
