#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cascademl/cascade.hpp"
#include "cascademl/data.hpp"
#include "cascademl/feature_select.hpp"
#include "cascademl/learners.hpp"

namespace cascademl {

enum class Construction { bagging, random_subspace };
enum class Fusion { majority_vote, average_probability };

std::string to_string(Construction c);
std::string to_string(Fusion f);
Fusion parse_fusion(std::string_view name);

/// A single learner, optionally behind CFS+GA selection.
struct PlainSpec {
  LearnerSpec learner;
  std::optional<SelectionConfig> selection;
};

using MemberSpec = std::variant<PlainSpec, CascadeSpec>;
using MemberModel = std::variant<TrainedModel, SelectedModel, CascadeModel>;

MemberModel train_member(const MemberSpec& spec, const DataTable& table, Seed seed);
/// `instance` is in the schema the member was trained on.
Distribution predict_member(const MemberModel& model, Instance instance);

struct EnsembleMember {
  MemberModel model;
  FeatureMask mask;  // full for bagging, the random subspace otherwise
};

struct EnsembleModel {
  Construction construction = Construction::bagging;
  Fusion fusion = Fusion::majority_vote;
  Schema schema;
  ClassLabels labels;
  std::vector<EnsembleMember> members;
};

/// Member i trains on bootstrap_sample(table, derive_seed(seed, {i, 0})).
EnsembleModel train_bagging(const MemberSpec& spec, const DataTable& table, int n, Seed seed,
                            Fusion fusion = Fusion::majority_vote);

/// Member i trains on every row of project(table, mask_i), with
/// mask_i = random_subspace(schema, fraction, derive_seed(seed, {i, 1})).
EnsembleModel train_random_subspace(const MemberSpec& spec, const DataTable& table, int n, double fraction,
                                    Seed seed, Fusion fusion = Fusion::majority_vote);

/// Per-member distributions, each computed on the member's own masked view.
std::vector<Distribution> member_distributions(const EnsembleModel& ensemble, Instance instance);

/// majority_vote: (negative votes, positive votes) / n, each member voting
/// its predicted_label. average_probability: the mean distribution.
Distribution fuse_distributions(std::span<const Distribution> members, Fusion fusion);

Distribution fuse(const EnsembleModel& ensemble, Instance instance);
Distribution fuse(const EnsembleModel& ensemble, Instance instance, Fusion fusion);

//   cascademl-ensemble 1
//   construction <bagging|random_subspace>
//   fusion <majority_vote|average_probability>
//   <schema block>
//   members <n>
//   member <plain|selected|cascade>
//   mask ...
//   <member block>
//   ...
//   end
void write_ensemble(std::ostream& out, const EnsembleModel& model);
EnsembleModel read_ensemble(std::istream& in);
EnsembleModel read_ensemble(TokenReader& in);

void write_member(std::ostream& out, const MemberModel& model);
MemberModel read_member(TokenReader& in);

std::string describe(const EnsembleModel& model);

}  // namespace cascademl
