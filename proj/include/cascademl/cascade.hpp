#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cascademl/data.hpp"
#include "cascademl/feature_select.hpp"
#include "cascademl/learners.hpp"

namespace cascademl {

/// Attributes the meta learner sees besides the appended probability.
enum class MetaAttributes { all, selected };

std::string to_string(MetaAttributes m);
MetaAttributes parse_meta_attributes(std::string_view name);

/// Two-level loose-coupled cascade: a Naive Bayes base level behind CFS+GA
/// selection, and a C4.5 or RIPPER meta level.
struct CascadeSpec {
  LearnerSpec base = LearnerSpec::of(Algorithm::naive_bayes);
  LearnerSpec meta = LearnerSpec::of(Algorithm::c45);
  SelectionConfig selection;
  MetaAttributes meta_attributes = MetaAttributes::all;

  void validate() const;
};

struct CascadeModel {
  Schema schema;  // the original, un-extended schema
  ClassLabels labels;
  SelectedModel base;
  TrainedModel meta;
  MetaAttributes meta_attributes = MetaAttributes::all;

  const FeatureMask& base_mask() const noexcept { return base.mask; }
};

/// Name of the appended attribute: "p_pos", suffixed with _1, _2, ... if
/// the schema already uses it.
std::string probability_attribute_name(const Schema& schema);

/// Appends one numeric column holding the base model's positive-class
/// probability, computed on the mask-projected view of each row. Original
/// cells, row order, weights and origins are kept.
DataTable phi_extend(const DataTable& table, const TrainedModel& base_model, const FeatureMask& base_mask);

/// Selection and the base model are fit on `table`; the meta training set is
/// built from resubstitution predictions of the base model.
CascadeModel train_cascade(const CascadeSpec& spec, const DataTable& table, Seed seed);
/// Convenience form with default selection settings.
CascadeModel train_cascade(const LearnerSpec& base, const LearnerSpec& meta, const DataTable& table, Seed seed);

/// Instance in the original schema, extended with the base probability.
std::vector<double> cascade_meta_instance(const CascadeModel& model, Instance instance);
Distribution predict_cascade(const CascadeModel& model, Instance instance);

//   cascademl-cascade 1
//   meta_attributes <all|selected>
//   <schema block>
//   <selected-model block>
//   <model block>
//   end
void write_cascade(std::ostream& out, const CascadeModel& model);
CascadeModel read_cascade(std::istream& in);
CascadeModel read_cascade(TokenReader& in);

std::string describe(const CascadeModel& model);

}  // namespace cascademl
