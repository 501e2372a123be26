#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cascademl/data.hpp"
#include "cascademl/rng.hpp"
#include "cascademl/text_io.hpp"

namespace cascademl {

/// (negative, positive) class probabilities.
using Distribution = Eigen::Array2d;

/// Argmax with ties going to the negative class.
inline int predicted_label(const Distribution& d) noexcept { return d(kPositive) > d(kNegative) ? kPositive : kNegative; }

/// (count + 1) / (total + 2) per class.
inline Distribution laplace(const Eigen::Array2d& counts) noexcept { return (counts + 1.0) / (counts.sum() + 2.0); }

enum class Algorithm { naive_bayes, c45, ripper };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

struct NaiveBayesParams {
  /// Gaussian variance floor, as a multiple of the attribute's squared range.
  double variance_floor = 1e-6;
};

struct C45Params {
  double confidence = 0.25;  // pessimistic pruning confidence factor, (0, 0.5]
  int min_objects = 2;       // minimum weight per branch of a split
  bool prune = true;
  bool collapse = true;  // drop subtrees that do not lower training error
  /// Numeric splits need min(25, max(min_objects, fraction * weight / 2)) per branch; 0 disables.
  double numeric_split_fraction = 0.1;
  /// Numeric gain is reduced by log2(candidate thresholds) / weight.
  bool mdl_correction = true;
};

struct RipperParams {
  int folds = 3;                 // 1/folds of each class goes to the pruning set
  int optimizations = 2;
  double dl_slack_bits = 64.0;   // stop once DL exceeds the best so far by this much
  double max_error_rate = 0.5;   // stop once a rule errs more often than this on prune data
  double min_coverage = 2.0;     // minimum positive weight a grown rule must cover
  bool prune = true;
};

struct LearnerSpec {
  Algorithm algorithm = Algorithm::c45;
  NaiveBayesParams naive_bayes;
  C45Params c45;
  RipperParams ripper;

  static LearnerSpec of(Algorithm a) {
    LearnerSpec spec;
    spec.algorithm = a;
    return spec;
  }

  /// Throws std::invalid_argument when a hyperparameter is out of range.
  void validate() const;
};

struct NaiveBayesModel {
  struct AttributeModel {
    bool nominal = false;
    Eigen::Array<double, 2, Eigen::Dynamic> log_likelihood;  // nominal: per class x value
    Eigen::Array2d mean = Eigen::Array2d::Zero();
    Eigen::Array2d variance = Eigen::Array2d::Ones();
  };
  Eigen::Array2d log_prior = Eigen::Array2d::Zero();
  std::vector<AttributeModel> attributes;
};

struct TreeNode {
  int attribute = -1;      // -1 for a leaf
  bool nominal = false;    // multiway split, one child per domain value
  double threshold = 0.0;  // numeric split: left child is `value <= threshold`
  Eigen::Array2d counts = Eigen::Array2d::Zero();
  std::vector<int> children;

  bool is_leaf() const noexcept { return children.empty(); }
};

/// Flat C4.5 tree; nodes[0] is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  int depth() const;
  int leaves() const;
};

struct Condition {
  enum class Op { equals, less_equal, greater_equal };
  int attribute = 0;
  Op op = Op::equals;
  double value = 0.0;

  bool matches(Instance instance) const noexcept;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Rule {
  std::vector<Condition> conditions;
  int consequent = kPositive;
  Eigen::Array2d coverage = Eigen::Array2d::Zero();  // training weight first matched by this rule

  bool covers(Instance instance) const noexcept;
};

/// Ordered rules followed by the default class.
struct RuleList {
  std::vector<Rule> rules;
  int default_class = kNegative;
  Eigen::Array2d default_coverage = Eigen::Array2d::Zero();
};

using ModelStructure = std::variant<NaiveBayesModel, DecisionTree, RuleList>;

class TrainedModel {
 public:
  TrainedModel(Schema schema, ClassLabels labels, ModelStructure structure);

  Algorithm algorithm() const noexcept;
  const Schema& schema() const noexcept { return schema_; }
  const ClassLabels& class_labels() const noexcept { return labels_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  const ModelStructure& structure() const noexcept { return structure_; }

  template <typename T>
  const T& as() const {
    return std::get<T>(structure_);
  }

 private:
  Schema schema_;
  ClassLabels labels_;
  std::uint64_t fingerprint_;
  ModelStructure structure_;
};

/// Trains on every row of `table`. `seed` drives RIPPER's grow/prune split.
TrainedModel train(const LearnerSpec& spec, const DataTable& table, Seed seed = 0);

NaiveBayesModel train_naive_bayes(const DataTable& table, const NaiveBayesParams& params = {});
DecisionTree train_c45(const DataTable& table, const C45Params& params = {});
RuleList train_ripper(const DataTable& table, const RipperParams& params, Seed seed);

/// Throws std::invalid_argument when the instance does not fit the model's schema.
Distribution predict_distribution(const TrainedModel& model, Instance instance);
/// Row of a table; the table's schema fingerprint must match the model's.
Distribution predict_distribution(const TrainedModel& model, const DataTable& table, int row);

// -- C4.5 split scoring ---------------------------------------------------

/// Nominal attributes split multiway; numeric ones at a threshold.
struct Split {
  std::optional<double> threshold;

  static Split multiway() { return {}; }
  static Split at(double t) { return {t}; }
};

struct SplitScore {
  double gain = 0.0;        // information gain in bits
  double split_info = 0.0;  // entropy of the branch proportions
};

SplitScore c45_split_score(const DataTable& table, std::span<const int> rows, int attribute, const Split& split);

/// Gain ratio of `split` over all rows of `table`, or nullopt when the split
/// is ineligible: its gain is below `mean_gain` (the mean gain of the
/// competing candidates) or its split info is ~0.
std::optional<double> c45_gain_ratio(const DataTable& table, int attribute, const Split& split,
                                     double mean_gain = 0.0);

/// C4.5's upper-confidence estimate of extra errors at a leaf that covers
/// `n` weight with `e` observed errors.
double pessimistic_extra_errors(double n, double e, double confidence);

// -- RIPPER ----------------------------------------------------------------

/// IREP*-style rule list for `target_class` with two optimization rounds
/// (per `params`); the default is the other class.
RuleList ripper_grow_prune(const DataTable& table, int target_class, Seed seed, const RipperParams& params = {});

// -- Serialization ---------------------------------------------------------

void write_model(std::ostream& out, const TrainedModel& model);
TrainedModel read_model(std::istream& in);
TrainedModel read_model(TokenReader& in);
std::string serialize(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& text);

void write_schema(std::ostream& out, const Schema& schema, const ClassLabels& labels);
std::pair<Schema, ClassLabels> read_schema(TokenReader& in);

/// Human-readable rendering (tree, rules or NB tables).
std::string describe(const TrainedModel& model);

}  // namespace cascademl
