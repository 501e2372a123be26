#include "cascademl/cascade.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace cascademl {

std::string to_string(MetaAttributes m) { return m == MetaAttributes::all ? "all" : "selected"; }

MetaAttributes parse_meta_attributes(std::string_view name) {
  if (name == "all") return MetaAttributes::all;
  if (name == "selected") return MetaAttributes::selected;
  throw std::invalid_argument("unknown meta_attributes '" + std::string(name) + "'");
}

void CascadeSpec::validate() const {
  if (base.algorithm != Algorithm::naive_bayes) throw std::invalid_argument("cascade base level must be naive_bayes");
  if (meta.algorithm == Algorithm::naive_bayes) throw std::invalid_argument("cascade meta level must be c45 or ripper");
  base.validate();
  meta.validate();
  selection.ga.validate();
  if (selection.bins < 1) throw std::invalid_argument("cfs.bins must be positive");
}

std::string probability_attribute_name(const Schema& schema) {
  auto taken = [&](const std::string& name) {
    return std::any_of(schema.begin(), schema.end(), [&](const auto& a) { return a.name == name; });
  };
  std::string name = "p_pos";
  for (int suffix = 1; taken(name); ++suffix) name = "p_pos_" + std::to_string(suffix);
  return name;
}

namespace {

DataTable append_column(const DataTable& table, const Eigen::VectorXd& column) {
  Schema schema = table.schema();
  schema.push_back(AttributeSchema::numeric(probability_attribute_name(table.schema())));
  CellMatrix cells(table.rows(), table.attributes() + 1);
  cells.leftCols(table.attributes()) = table.cells();
  cells.col(table.attributes()) = column;
  return DataTable(std::make_shared<const Schema>(std::move(schema)), table.class_labels(), std::move(cells),
                   table.labels(), table.weights(), std::vector<int>(table.origin().begin(), table.origin().end()));
}

Eigen::VectorXd base_probabilities(const DataTable& table, const TrainedModel& base_model, const FeatureMask& mask) {
  if (mask.attribute_count() != table.attributes())
    throw std::invalid_argument("phi_extend: mask does not fit the table");
  if (schema_fingerprint(project(table.schema(), mask)) != base_model.fingerprint())
    throw std::invalid_argument("phi_extend: base model was not trained on the masked schema");
  Eigen::VectorXd p(table.rows());
  for (int i = 0; i < table.rows(); ++i) p(i) = predict_distribution(base_model, project(table.row(i), mask))(kPositive);
  return p;
}

}  // namespace

DataTable phi_extend(const DataTable& table, const TrainedModel& base_model, const FeatureMask& base_mask) {
  return append_column(table, base_probabilities(table, base_model, base_mask));
}

CascadeModel train_cascade(const CascadeSpec& spec, const DataTable& table, Seed seed) {
  spec.validate();
  SelectedModel base = train_selected(spec.base, spec.selection, table, derive_seed(seed, {0}));
  const Eigen::VectorXd p = base_probabilities(table, base.model, base.mask);
  const DataTable meta_input =
      spec.meta_attributes == MetaAttributes::all ? append_column(table, p) : append_column(project(table, base.mask), p);
  TrainedModel meta = train(spec.meta, meta_input, derive_seed(seed, {1}));
  return CascadeModel{table.schema(), table.class_labels(), std::move(base), std::move(meta), spec.meta_attributes};
}

CascadeModel train_cascade(const LearnerSpec& base, const LearnerSpec& meta, const DataTable& table, Seed seed) {
  CascadeSpec spec;
  spec.base = base;
  spec.meta = meta;
  return train_cascade(spec, table, seed);
}

std::vector<double> cascade_meta_instance(const CascadeModel& model, Instance instance) {
  check_instance(model.schema, instance);
  const double p = predict_selected(model.base, instance)(kPositive);
  std::vector<double> extended = model.meta_attributes == MetaAttributes::all
                                     ? std::vector<double>(instance.begin(), instance.end())
                                     : project(instance, model.base.mask);
  extended.push_back(p);
  return extended;
}

Distribution predict_cascade(const CascadeModel& model, Instance instance) {
  return predict_distribution(model.meta, cascade_meta_instance(model, instance));
}

void write_cascade(std::ostream& out, const CascadeModel& model) {
  out << "cascademl-cascade 1\n";
  out << "meta_attributes " << to_string(model.meta_attributes) << '\n';
  write_schema(out, model.schema, model.labels);
  write_selected(out, model.base);
  write_model(out, model.meta);
  out << "end\n";
}

CascadeModel read_cascade(std::istream& stream) {
  TokenReader in(stream);
  return read_cascade(in);
}

CascadeModel read_cascade(TokenReader& in) {
  in.expect("cascademl-cascade");
  if (in.next_int() != 1) throw FormatError("unsupported cascade format version");
  in.expect("meta_attributes");
  const MetaAttributes meta_attributes = [&] {
    try {
      return parse_meta_attributes(in.next());
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
  }();
  auto [schema, labels] = read_schema(in);
  SelectedModel base = read_selected(in);
  TrainedModel meta = read_model(in);
  in.expect("end");
  if (base.mask.attribute_count() != static_cast<int>(schema.size()))
    throw FormatError("cascade: base mask does not fit the schema");
  const std::size_t meta_width = meta_attributes == MetaAttributes::all ? schema.size() : base.mask.indices().size();
  if (meta.schema().size() != meta_width + 1) throw FormatError("cascade: meta schema has the wrong width");
  return CascadeModel{std::move(schema), std::move(labels), std::move(base), std::move(meta), meta_attributes};
}

std::string describe(const CascadeModel& model) {
  std::ostringstream out;
  out << "cascade over " << model.schema.size() << " attributes, meta level sees " << to_string(model.meta_attributes)
      << " attributes plus " << model.meta.schema().back().name << '\n';
  out << "base mask " << model.base.mask.to_string() << " (";
  for (int j : model.base.mask.indices()) out << ' ' << model.schema[j].name;
  out << " )\n\n[base]\n" << describe(model.base.model) << "\n[meta]\n" << describe(model.meta);
  return out.str();
}

}  // namespace cascademl
