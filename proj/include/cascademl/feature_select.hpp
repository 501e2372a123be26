#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "cascademl/data.hpp"
#include "cascademl/learners.hpp"
#include "cascademl/rng.hpp"

namespace cascademl {

/// Symmetric uncertainty between every pair of attributes and between each
/// attribute and the class. Index `attributes()` of `correlation` is the class.
struct CfsCache {
  Eigen::MatrixXd correlation;
  std::vector<std::vector<double>> cut_points;  // per attribute; empty for nominal

  int attributes() const noexcept { return static_cast<int>(correlation.rows()) - 1; }
  double class_correlation(int attribute) const { return correlation(attribute, attributes()); }
};

/// Equal-frequency cut points: up to `bins - 1` midpoints between adjacent
/// distinct sorted values. A boundary inside a run of equal values moves to
/// whichever neighbouring change point keeps the bin closest to its target
/// size.
std::vector<double> equal_frequency_cuts(std::vector<double> values, int bins);

/// Codes per cell: nominal value index, or the numeric bin under `cuts`.
/// Missing cells get their own code.
Eigen::MatrixXi discretize(const DataTable& table, const std::vector<std::vector<double>>& cuts);

/// SU(X, Y) = 2 (H(X) + H(Y) - H(X, Y)) / (H(X) + H(Y)); 0 when both are constant.
double symmetric_uncertainty(const Eigen::VectorXi& x, const Eigen::VectorXi& y, const Eigen::VectorXd& weights);

CfsCache build_cfs_cache(const DataTable& table, int bins = 10);
/// Cache from precomputed cut points (bit-exact reproduction).
CfsCache build_cfs_cache(const DataTable& table, std::vector<std::vector<double>> cuts);

/// Hall's CFS merit k r_cf / sqrt(k + k (k - 1) r_ff); 0 if the denominator vanishes.
double cfs_merit(const CfsCache& cache, const FeatureMask& subset);

using Chromosome = std::vector<bool>;

struct GaConfig {
  int population = 20;
  int generations = 20;
  double crossover = 0.6;   // single-point
  double mutation = 0.033;  // per bit
  int elitism = 1;
  Seed seed = 1;
  /// Optional seed individuals; the rest of the population is random.
  std::vector<Chromosome> initial_population;

  void validate() const;
};

struct GaResult {
  FeatureMask best;
  double merit = 0.0;
  double best_initial_merit = 0.0;
};

/// Bitstring GA with roulette selection maximizing cfs_merit. Returns the
/// best individual seen in any generation.
GaResult ga_search_detailed(const CfsCache& cache, const GaConfig& config);
FeatureMask ga_search(const CfsCache& cache, const GaConfig& config);

/// Enumerates every non-empty subset; limited to 20 attributes.
GaResult exhaustive_search(const CfsCache& cache);

struct SelectionConfig {
  int bins = 10;
  GaConfig ga;
};

/// CFS + GA selection on `table`; `seed` replaces the GA seed.
FeatureMask select_features(const DataTable& table, const SelectionConfig& config, Seed seed);

/// A learner trained on the attributes chosen by select_features.
struct SelectedModel {
  FeatureMask mask;
  TrainedModel model;
};

SelectedModel train_selected(const LearnerSpec& spec, const SelectionConfig& selection, const DataTable& table,
                             Seed seed);
Distribution predict_selected(const SelectedModel& model, Instance instance);

void write_selected(std::ostream& out, const SelectedModel& model);
SelectedModel read_selected(std::istream& in);
SelectedModel read_selected(TokenReader& in);

void write_mask(std::ostream& out, const FeatureMask& mask);
FeatureMask read_mask(TokenReader& in);

}  // namespace cascademl
