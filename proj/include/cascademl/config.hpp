#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascademl/cascade.hpp"
#include "cascademl/ensemble.hpp"
#include "cascademl/feature_select.hpp"
#include "cascademl/learners.hpp"

namespace cascademl {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Plain-text settings file:
///
///   # comment
///   [section]
///   key = value
///   [section.sub]
///   other = 1
///
/// Section names may be dotted to nest. Keys are unique per section.
class ConfigDocument {
 public:
  static ConfigDocument parse(std::istream& in);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  int line_of(const std::string& section, const std::string& key) const;

  /// Typed lookups; a present but unparsable value throws ConfigError.
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;

  /// Throws ConfigError on any section or key not listed in `known`
  /// (section -> keys).
  void reject_unknown(const std::map<std::string, std::set<std::string>>& known) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::map<std::string, int> section_lines_;
};

enum class DataFormat { cleveland, csv };
enum class Aggregation { fold_mean, run_mean };
enum class Wrapper { none, bagging, random_subspace };

std::string to_string(Aggregation a);

/// One evaluated method: an optional ensemble wrapper around a plain
/// learner or a cascade with the given meta algorithm.
struct MethodConfig {
  Wrapper wrapper = Wrapper::none;
  bool cascade = false;
  Algorithm algorithm = Algorithm::c45;  // the meta algorithm for cascades

  /// Config token, e.g. "bagging:cascade_c45".
  std::string token() const;
  /// Report label, e.g. "Bg-C_C4.5".
  std::string display_name() const;
  bool is_ensemble() const noexcept { return wrapper != Wrapper::none; }
  friend bool operator==(const MethodConfig&, const MethodConfig&) = default;
};

MethodConfig parse_method(const std::string& token);

struct ExperimentConfig {
  std::filesystem::path data;
  DataFormat format = DataFormat::cleveland;
  std::filesystem::path schema;  // csv only
  std::vector<MethodConfig> methods;
  int runs = 25;
  int folds = 10;
  int members = 30;
  Seed seed = 1;
  double subspace_fraction = 0.5;
  bool stratified = true;
  Aggregation aggregation = Aggregation::fold_mean;
  Fusion label_fusion = Fusion::majority_vote;
  Fusion score_fusion = Fusion::average_probability;

  NaiveBayesParams naive_bayes;
  bool naive_bayes_selection = true;  // plain NB runs behind CFS+GA
  C45Params c45;
  RipperParams ripper;
  SelectionConfig selection;
  MetaAttributes meta_attributes = MetaAttributes::all;

  void validate() const;
  LearnerSpec learner(Algorithm algorithm) const;
  MemberSpec member_spec(const MethodConfig& method) const;
};

/// Relative data/schema paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Every setting in the file syntax, in a fixed order; parsing it back
/// yields an equal configuration.
std::string canonical_config(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

/// The thirteen Cleveland methods in report order.
std::vector<MethodConfig> paper_methods();
/// The packaged protocol (25 x 10-fold CV, 30 members) for `data`.
ExperimentConfig paper_config(const std::filesystem::path& data);

}  // namespace cascademl
