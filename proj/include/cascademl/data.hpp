#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cascademl/rng.hpp"

namespace cascademl {

/// Raised for malformed input files; carries the offending line and field.
class IngestionError : public std::runtime_error {
 public:
  IngestionError(const std::string& what, int line = 0, std::string field = {})
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class AttributeKind { nominal, numeric };

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  std::vector<std::string> values;  // nominal domain, in code order

  static AttributeSchema numeric(std::string name) {
    return {std::move(name), AttributeKind::numeric, {}};
  }
  static AttributeSchema nominal(std::string name, std::vector<std::string> values) {
    return {std::move(name), AttributeKind::nominal, std::move(values)};
  }

  bool is_nominal() const noexcept { return kind == AttributeKind::nominal; }
  int arity() const noexcept { return static_cast<int>(values.size()); }
  /// Index of `label` in the nominal domain, or -1.
  int value_index(std::string_view label) const;

  friend bool operator==(const AttributeSchema&, const AttributeSchema&) = default;
};

using Schema = std::vector<AttributeSchema>;

/// Throws std::invalid_argument on duplicate names or bad nominal domains.
void validate_schema(const Schema& schema);

/// FNV-1a over names, kinds and domains.
std::uint64_t schema_fingerprint(const Schema& schema);

struct ClassLabels {
  std::string negative = "0";
  std::string positive = "1";
  friend bool operator==(const ClassLabels&, const ClassLabels&) = default;
};

inline constexpr int kNegative = 0;
inline constexpr int kPositive = 1;

/// Cells are doubles: numeric values as-is, nominal values as the index into
/// the attribute's domain. NaN marks a missing cell.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Cut between distinct values `lo < hi` for a `x <= cut` test: the midpoint,
/// or `lo` when the midpoint rounds up to `hi` (adjacent doubles).
inline double split_point(double lo, double hi) noexcept {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

using Instance = std::span<const double>;
using CellMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Immutable binary-class table. Rows remember the index they had in the
/// table they were originally loaded as (`origin`), which survives
/// subsetting, bootstrap and projection.
class DataTable {
 public:
  DataTable(std::shared_ptr<const Schema> schema, ClassLabels labels, CellMatrix cells,
            Eigen::VectorXi classes, Eigen::VectorXd weights = {}, std::vector<int> origin = {});

  const Schema& schema() const noexcept { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const noexcept { return schema_; }
  const ClassLabels& class_labels() const noexcept { return labels_; }

  int rows() const noexcept { return static_cast<int>(cells_.rows()); }
  int attributes() const noexcept { return static_cast<int>(cells_.cols()); }
  bool empty() const noexcept { return cells_.rows() == 0; }

  Instance row(int i) const { return {cells_.row(i).data(), static_cast<std::size_t>(cells_.cols())}; }
  double cell(int i, int j) const { return cells_(i, j); }
  int label(int i) const { return classes_(i); }
  double weight(int i) const { return weights_(i); }

  const CellMatrix& cells() const noexcept { return cells_; }
  const Eigen::VectorXi& labels() const noexcept { return classes_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  std::span<const int> origin() const noexcept { return origin_; }

  /// Row selection; indices may repeat.
  DataTable subset(std::span<const int> rows) const;

  /// Weighted (negative, positive) totals.
  Eigen::Array2d class_weights() const;
  /// Unweighted (negative, positive) row counts.
  Eigen::Array2i class_counts() const;

 private:
  std::shared_ptr<const Schema> schema_;
  ClassLabels labels_;
  CellMatrix cells_;
  Eigen::VectorXi classes_;
  Eigen::VectorXd weights_;
  std::vector<int> origin_;
};

/// Throws std::invalid_argument if `instance` does not fit `schema`.
void check_instance(const Schema& schema, Instance instance);

/// Sorted, duplicate-free, non-empty set of attribute indices.
class FeatureMask {
 public:
  FeatureMask(std::vector<int> indices, int attribute_count);
  static FeatureMask full(int attribute_count);

  std::span<const int> indices() const noexcept { return indices_; }
  int size() const noexcept { return static_cast<int>(indices_.size()); }
  int attribute_count() const noexcept { return attribute_count_; }
  bool contains(int attribute) const;
  bool is_full() const noexcept { return size() == attribute_count_; }

  /// `inner` indexes the projected space of this mask; the result indexes
  /// the original space.
  FeatureMask compose(const FeatureMask& inner) const;

  std::string to_string() const;
  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

 private:
  std::vector<int> indices_;
  int attribute_count_ = 0;
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // fold index per row
  Seed seed = 0;

  std::vector<int> test_rows(int fold) const;
  std::vector<int> train_rows(int fold) const;
};

struct LoadResult {
  DataTable table;
  int imputed_cells = 0;
};

/// The 13-attribute schema of the processed Cleveland heart-disease file.
Schema cleveland_schema();

/// Reads the processed Cleveland CSV layout: 13 attributes then `num`
/// (0 = absent, 1..4 = present), "?" for missing. Missing cells are
/// imputed (mode for nominal, median for numeric).
LoadResult load_cleveland(std::istream& source);
LoadResult load_cleveland_file(const std::string& path);

/// Parses a schema sidecar: one `name: numeric`, `name: nominal a,b,c` or
/// `name: class neg,pos` line per CSV column, in column order. Exactly one
/// class line. Blank lines and `#` comments are skipped.
struct SidecarSchema {
  Schema attributes;
  int class_column = -1;
  ClassLabels labels;
};
SidecarSchema parse_schema_sidecar(std::istream& source);

/// Generic CSV with a header row whose names match the sidecar.
LoadResult load_csv(std::istream& csv, const SidecarSchema& sidecar);
LoadResult load_csv_files(const std::string& csv_path, const std::string& schema_path);

/// Replaces missing cells in place of a copy; returns the imputed table and count.
LoadResult impute_missing(const DataTable& table);

/// k-fold plan; stratified by class unless `stratified` is false. Rows of
/// each class are shuffled and dealt round-robin, continuing the deal
/// across classes, so fold sizes and per-class fold counts each differ by
/// at most one. Classes smaller than k leave some folds without members of
/// that class.
FoldPlan stratified_folds(const DataTable& table, int k, Seed seed, bool stratified = true);

/// |table| draws with replacement, uniform over rows.
DataTable bootstrap_sample(const DataTable& table, Seed seed);

/// Subspace size: max(1, round_half_up(fraction * |schema|)).
int subspace_size(int attribute_count, double fraction);
FeatureMask random_subspace(const Schema& schema, double fraction, Seed seed);

DataTable project(const DataTable& table, const FeatureMask& mask);
Schema project(const Schema& schema, const FeatureMask& mask);
std::vector<double> project(Instance instance, const FeatureMask& mask);

}  // namespace cascademl
