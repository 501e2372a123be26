#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cascademl/config.hpp"
#include "cascademl/data.hpp"
#include "cascademl/metrics.hpp"

namespace cascademl {

/// Metrics of one method on one held-out fold.
struct FoldResult {
  int run = 0;
  int fold = 0;
  double accuracy = 0.0;                 // percent
  std::optional<double> roc_auc;         // undefined on single-class folds
  std::optional<double> tn_rate;
  std::optional<double> tp_rate;
  std::optional<double> member_accuracy;  // ensembles only, percent
  std::optional<double> kw_variance;      // ensembles with >= 2 members
  /// Attribute masks (original indices) chosen by CFS+GA, one per selecting model.
  std::vector<FeatureMask> selected_masks;
  /// Random subspace masks, one per member.
  std::vector<FeatureMask> subspace_masks;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation over the aggregated values
  double min = 0.0;
  double max = 0.0;
  int count = 0;    // values that were defined
};

struct MethodReport {
  MethodConfig method;
  MetricSummary accuracy, roc_auc, tn_rate, tp_rate;
  std::optional<MetricSummary> member_accuracy, kw_variance;
  /// Fraction of CFS+GA masks containing each attribute; empty if the method never selects.
  std::vector<double> selection_frequency;
  int selections = 0;
};

struct Provenance {
  Seed seed = 0;
  std::uint64_t config_hash = 0;
  std::string timestamp;  // UTC, ISO 8601
  std::string dataset;
  int rows = 0;
  int attributes = 0;
  int imputed_cells = 0;
  int runs = 0;
  int folds = 0;
  int members = 0;
  Aggregation aggregation = Aggregation::fold_mean;
  Fusion label_fusion = Fusion::majority_vote;
  Fusion score_fusion = Fusion::average_probability;
};

struct EvaluationReport {
  Provenance provenance;
  std::vector<std::string> attribute_names;
  std::vector<MethodReport> methods;
  /// methods x (runs * folds), run-major.
  std::vector<std::vector<FoldResult>> folds;
};

/// What one (run, fold) cell saw; lets callers audit the protocol.
struct FoldTrace {
  int run = 0;
  int fold = 0;
  std::vector<int> train_origin;
  std::vector<int> test_origin;
};

struct RunOptions {
  int jobs = 1;
  std::function<void(const FoldTrace&)> on_fold;  // called from worker threads
};

/// Seeds: fold plan of run r uses derive_seed(seed, {r}); every method in
/// (run r, fold f) trains with derive_seed(seed, {r, f, 1}).
Seed fold_plan_seed(Seed master, int run);
Seed cell_seed(Seed master, int run, int fold);

/// Trains `method` on `train` and scores it on `test`.
FoldResult evaluate_method(const ExperimentConfig& config, const MethodConfig& method, const DataTable& train,
                           const DataTable& test, Seed seed);

/// Runs the configured protocol on `data`. Throws std::runtime_error naming
/// method, run and fold when a cell fails.
EvaluationReport run_experiment(const ExperimentConfig& config, const LoadResult& data, const RunOptions& options = {});
/// Loads the configured dataset first (IngestionError on bad data).
EvaluationReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

LoadResult load_dataset(const ExperimentConfig& config);

/// Aggregates the fold values of one metric under `aggregation`.
MetricSummary summarize(const std::vector<std::optional<double>>& values, const std::vector<int>& runs,
                        Aggregation aggregation);

enum class ReportFormat { csv, markdown };
ReportFormat parse_report_format(std::string_view name);

/// Five-decimal tables. CSV is a single table with no provenance; markdown
/// adds provenance, the diversity table and selection frequencies.
void emit_report(std::ostream& out, const EvaluationReport& report, ReportFormat format);
std::string emit_report(const EvaluationReport& report, ReportFormat format);

/// One line per member mask: method, run, fold, kind, mask.
void write_mask_log(std::ostream& out, const EvaluationReport& report);

}  // namespace cascademl
