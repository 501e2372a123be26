#include <iomanip>
#include <sstream>

#include "cascademl/learners.hpp"

namespace cascademl {

// Defined next to each algorithm.
Distribution predict_naive_bayes(const NaiveBayesModel& model, Instance instance);
Distribution predict_c45(const DecisionTree& tree, Instance instance);
Distribution predict_ripper(const RuleList& list, Instance instance);

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::naive_bayes: return "naive_bayes";
    case Algorithm::c45: return "c45";
    case Algorithm::ripper: return "ripper";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "naive_bayes") return Algorithm::naive_bayes;
  if (name == "c45") return Algorithm::c45;
  if (name == "ripper") return Algorithm::ripper;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

void LearnerSpec::validate() const {
  if (!(naive_bayes.variance_floor > 0)) throw std::invalid_argument("naive_bayes.variance_floor must be positive");
  if (!(c45.confidence > 0) || c45.confidence > 0.5) throw std::invalid_argument("c45.confidence must lie in (0, 0.5]");
  if (c45.min_objects < 1) throw std::invalid_argument("c45.min_objects must be at least 1");
  if (!(c45.numeric_split_fraction >= 0) || c45.numeric_split_fraction > 1)
    throw std::invalid_argument("c45.numeric_split_fraction must lie in [0, 1]");
  if (ripper.folds < 2) throw std::invalid_argument("ripper.folds must be at least 2");
  if (ripper.optimizations < 0) throw std::invalid_argument("ripper.optimizations must be non-negative");
  if (!(ripper.dl_slack_bits >= 0)) throw std::invalid_argument("ripper.dl_slack_bits must be non-negative");
  if (!(ripper.max_error_rate > 0) || ripper.max_error_rate > 1)
    throw std::invalid_argument("ripper.max_error_rate must lie in (0, 1]");
  if (!(ripper.min_coverage >= 0)) throw std::invalid_argument("ripper.min_coverage must be non-negative");
}

TrainedModel::TrainedModel(Schema schema, ClassLabels labels, ModelStructure structure)
    : schema_(std::move(schema)),
      labels_(std::move(labels)),
      fingerprint_(schema_fingerprint(schema_)),
      structure_(std::move(structure)) {}

Algorithm TrainedModel::algorithm() const noexcept {
  switch (structure_.index()) {
    case 0: return Algorithm::naive_bayes;
    case 1: return Algorithm::c45;
    default: return Algorithm::ripper;
  }
}

TrainedModel train(const LearnerSpec& spec, const DataTable& table, Seed seed) {
  spec.validate();
  if (table.attributes() == 0) throw std::invalid_argument("train: table has no attributes");
  if (table.empty()) throw std::invalid_argument("train: table has no rows");
  ModelStructure structure = [&]() -> ModelStructure {
    switch (spec.algorithm) {
      case Algorithm::naive_bayes: return train_naive_bayes(table, spec.naive_bayes);
      case Algorithm::c45: return train_c45(table, spec.c45);
      case Algorithm::ripper: return train_ripper(table, spec.ripper, seed);
    }
    throw std::logic_error("unhandled algorithm");
  }();
  return TrainedModel(table.schema(), table.class_labels(), std::move(structure));
}

Distribution predict_distribution(const TrainedModel& model, Instance instance) {
  check_instance(model.schema(), instance);
  return std::visit(
      [&](const auto& s) -> Distribution {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NaiveBayesModel>) return predict_naive_bayes(s, instance);
        else if constexpr (std::is_same_v<T, DecisionTree>) return predict_c45(s, instance);
        else return predict_ripper(s, instance);
      },
      model.structure());
}

Distribution predict_distribution(const TrainedModel& model, const DataTable& table, int row) {
  if (schema_fingerprint(table.schema()) != model.fingerprint())
    throw std::invalid_argument("predict_distribution: table schema does not match the model");
  return predict_distribution(model, table.row(row));
}

// -- Serialization ----------------------------------------------------------
//
//   cascademl-model 1
//   algorithm <naive_bayes|c45|ripper>
//   classes <negative> <positive>
//   attributes <m>
//   attribute <name> numeric | attribute <name> nominal <k> <v1> ... <vk>
//   <algorithm body>
//   end
//
// Names and labels are percent-escaped tokens; doubles use the shortest
// round-trip decimal form.

namespace {

constexpr int kModelVersion = 1;

void write_pair(std::ostream& out, const Eigen::Array2d& a) {
  out << format_double(a(0)) << ' ' << format_double(a(1));
}

Eigen::Array2d read_pair(TokenReader& in) {
  Eigen::Array2d a;
  a(0) = in.next_double();
  a(1) = in.next_double();
  return a;
}

const char* op_token(Condition::Op op) {
  switch (op) {
    case Condition::Op::equals: return "==";
    case Condition::Op::less_equal: return "<=";
    case Condition::Op::greater_equal: return ">=";
  }
  return "?";
}

Condition::Op parse_op(const std::string& token) {
  if (token == "==") return Condition::Op::equals;
  if (token == "<=") return Condition::Op::less_equal;
  if (token == ">=") return Condition::Op::greater_equal;
  throw FormatError("unknown condition operator '" + token + "'");
}

void write_body(std::ostream& out, const NaiveBayesModel& m) {
  out << "prior ";
  write_pair(out, m.log_prior);
  out << '\n';
  for (std::size_t j = 0; j < m.attributes.size(); ++j) {
    const auto& a = m.attributes[j];
    if (a.nominal) {
      out << "nominal " << j << ' ' << a.log_likelihood.cols();
      for (int c = 0; c < 2; ++c)
        for (Eigen::Index v = 0; v < a.log_likelihood.cols(); ++v) out << ' ' << format_double(a.log_likelihood(c, v));
    } else {
      out << "gaussian " << j << ' ';
      write_pair(out, a.mean);
      out << ' ';
      write_pair(out, a.variance);
    }
    out << '\n';
  }
}

void write_body(std::ostream& out, const DecisionTree& t) {
  out << "nodes " << t.nodes.size() << '\n';
  for (std::size_t id = 0; id < t.nodes.size(); ++id) {
    const auto& n = t.nodes[id];
    out << "node " << id << ' ';
    if (n.is_leaf()) {
      out << "leaf ";
      write_pair(out, n.counts);
    } else if (n.nominal) {
      out << "nominal " << n.attribute << ' ';
      write_pair(out, n.counts);
      out << ' ' << n.children.size();
      for (int c : n.children) out << ' ' << c;
    } else {
      out << "numeric " << n.attribute << ' ' << format_double(n.threshold) << ' ';
      write_pair(out, n.counts);
      out << ' ' << n.children[0] << ' ' << n.children[1];
    }
    out << '\n';
  }
}

void write_body(std::ostream& out, const RuleList& r) {
  out << "default " << r.default_class << ' ';
  write_pair(out, r.default_coverage);
  out << "\nrules " << r.rules.size() << '\n';
  for (const auto& rule : r.rules) {
    out << "rule " << rule.consequent << ' ';
    write_pair(out, rule.coverage);
    out << ' ' << rule.conditions.size();
    for (const auto& c : rule.conditions)
      out << ' ' << c.attribute << ' ' << op_token(c.op) << ' ' << format_double(c.value);
    out << '\n';
  }
}

NaiveBayesModel read_naive_bayes(TokenReader& in, const Schema& schema) {
  NaiveBayesModel m;
  in.expect("prior");
  m.log_prior = read_pair(in);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    NaiveBayesModel::AttributeModel a;
    const auto kind = in.next();
    if (in.next_int() != static_cast<long long>(j)) throw FormatError("naive_bayes: attributes out of order");
    if (kind == "nominal") {
      a.nominal = true;
      const auto k = in.next_int();
      if (k != schema[j].arity()) throw FormatError("naive_bayes: arity mismatch");
      a.log_likelihood.resize(2, k);
      for (int c = 0; c < 2; ++c)
        for (Eigen::Index v = 0; v < k; ++v) a.log_likelihood(c, v) = in.next_double();
    } else if (kind == "gaussian") {
      a.mean = read_pair(in);
      a.variance = read_pair(in);
    } else {
      throw FormatError("naive_bayes: unknown attribute kind '" + kind + "'");
    }
    m.attributes.push_back(std::move(a));
  }
  return m;
}

DecisionTree read_c45(TokenReader& in, const Schema& schema) {
  DecisionTree t;
  in.expect("nodes");
  const auto count = in.next_int();
  if (count < 1) throw FormatError("c45: tree needs at least one node");
  t.nodes.resize(static_cast<std::size_t>(count));
  const auto m = static_cast<long long>(schema.size());
  for (long long id = 0; id < count; ++id) {
    in.expect("node");
    if (in.next_int() != id) throw FormatError("c45: nodes out of order");
    auto& n = t.nodes[static_cast<std::size_t>(id)];
    const auto kind = in.next();
    if (kind == "leaf") {
      n.counts = read_pair(in);
    } else if (kind == "nominal") {
      n.nominal = true;
      n.attribute = in.next_index(m);
      n.counts = read_pair(in);
      const auto k = in.next_int();
      if (k != schema[n.attribute].arity()) throw FormatError("c45: branch count mismatch");
      for (long long b = 0; b < k; ++b) n.children.push_back(in.next_index(count));
    } else if (kind == "numeric") {
      n.attribute = in.next_index(m);
      n.threshold = in.next_double();
      n.counts = read_pair(in);
      n.children = {in.next_index(count), in.next_index(count)};
    } else {
      throw FormatError("c45: unknown node kind '" + kind + "'");
    }
    for (int c : n.children)
      if (c <= id) throw FormatError("c45: child must follow its parent");
  }
  return t;
}

RuleList read_ripper(TokenReader& in, const Schema& schema) {
  RuleList r;
  in.expect("default");
  r.default_class = in.next_index(2);
  r.default_coverage = read_pair(in);
  in.expect("rules");
  const auto count = in.next_int();
  for (long long k = 0; k < count; ++k) {
    in.expect("rule");
    Rule rule;
    rule.consequent = in.next_index(2);
    rule.coverage = read_pair(in);
    const auto conditions = in.next_int();
    for (long long c = 0; c < conditions; ++c) {
      Condition cond;
      cond.attribute = in.next_index(static_cast<long long>(schema.size()));
      cond.op = parse_op(in.next());
      cond.value = in.next_double();
      rule.conditions.push_back(cond);
    }
    r.rules.push_back(std::move(rule));
  }
  return r;
}

}  // namespace

void write_schema(std::ostream& out, const Schema& schema, const ClassLabels& labels) {
  out << "classes " << escape_token(labels.negative) << ' ' << escape_token(labels.positive) << '\n';
  out << "attributes " << schema.size() << '\n';
  for (const auto& a : schema) {
    out << "attribute " << escape_token(a.name);
    if (a.is_nominal()) {
      out << " nominal " << a.values.size();
      for (const auto& v : a.values) out << ' ' << escape_token(v);
    } else {
      out << " numeric";
    }
    out << '\n';
  }
}

std::pair<Schema, ClassLabels> read_schema(TokenReader& in) {
  ClassLabels labels;
  in.expect("classes");
  labels.negative = unescape_token(in.next());
  labels.positive = unescape_token(in.next());
  in.expect("attributes");
  const auto m = in.next_int();
  if (m < 0) throw FormatError("negative attribute count");
  Schema schema;
  for (long long j = 0; j < m; ++j) {
    in.expect("attribute");
    auto name = unescape_token(in.next());
    const auto kind = in.next();
    if (kind == "numeric") {
      schema.push_back(AttributeSchema::numeric(std::move(name)));
    } else if (kind == "nominal") {
      const auto k = in.next_int();
      std::vector<std::string> values;
      for (long long v = 0; v < k; ++v) values.push_back(unescape_token(in.next()));
      schema.push_back(AttributeSchema::nominal(std::move(name), std::move(values)));
    } else {
      throw FormatError("unknown attribute kind '" + kind + "'");
    }
  }
  try {
    validate_schema(schema);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return {std::move(schema), std::move(labels)};
}

void write_model(std::ostream& out, const TrainedModel& model) {
  out << "cascademl-model " << kModelVersion << '\n';
  out << "algorithm " << to_string(model.algorithm()) << '\n';
  write_schema(out, model.schema(), model.class_labels());
  std::visit([&](const auto& s) { write_body(out, s); }, model.structure());
  out << "end\n";
}

TrainedModel read_model(std::istream& stream) {
  TokenReader in(stream);
  return read_model(in);
}

TrainedModel read_model(TokenReader& in) {
  in.expect("cascademl-model");
  if (const auto v = in.next_int(); v != kModelVersion)
    throw FormatError("unsupported model format version " + std::to_string(v));
  in.expect("algorithm");
  const auto algorithm = parse_algorithm(in.next());
  auto [schema, labels] = read_schema(in);
  ModelStructure structure = [&]() -> ModelStructure {
    switch (algorithm) {
      case Algorithm::naive_bayes: return read_naive_bayes(in, schema);
      case Algorithm::c45: return read_c45(in, schema);
      case Algorithm::ripper: return read_ripper(in, schema);
    }
    throw FormatError("unhandled algorithm");
  }();
  in.expect("end");
  return TrainedModel(std::move(schema), std::move(labels), std::move(structure));
}

std::string serialize(const TrainedModel& model) {
  std::ostringstream out;
  write_model(out, model);
  return out.str();
}

TrainedModel deserialize_model(const std::string& text) {
  std::istringstream in(text);
  return read_model(in);
}

// -- Pretty printing ----------------------------------------------------------

namespace {

std::string counts_text(const Eigen::Array2d& c) {
  std::ostringstream s;
  s << '(' << c(0) << '/' << c(1) << ')';
  return s.str();
}

std::string value_text(const Schema& schema, int attribute, double value) {
  const auto& a = schema[attribute];
  if (a.is_nominal()) return a.values[static_cast<std::size_t>(value)];
  std::ostringstream s;
  s << value;
  return s.str();
}

void describe_node(std::ostream& out, const TrainedModel& model, const DecisionTree& t, int id, int depth) {
  const auto& n = t.nodes[id];
  const auto& schema = model.schema();
  const auto& labels = model.class_labels();
  if (n.is_leaf()) {
    const Distribution d = laplace(n.counts);
    out << ": " << (predicted_label(d) == kPositive ? labels.positive : labels.negative) << ' '
        << counts_text(n.counts) << '\n';
    return;
  }
  out << '\n';
  for (std::size_t b = 0; b < n.children.size(); ++b) {
    out << std::string(static_cast<std::size_t>(depth) * 4, ' ') << "|   " << schema[n.attribute].name;
    if (n.nominal) out << " = " << schema[n.attribute].values[b];
    else out << (b == 0 ? " <= " : " > ") << n.threshold;
    describe_node(out, model, t, n.children[b], depth + 1);
  }
}

}  // namespace

std::string describe(const TrainedModel& model) {
  std::ostringstream out;
  const auto& schema = model.schema();
  const auto& labels = model.class_labels();
  out << to_string(model.algorithm()) << " model over " << schema.size() << " attributes, classes "
      << labels.negative << " / " << labels.positive << '\n';
  if (const auto* nb = std::get_if<NaiveBayesModel>(&model.structure())) {
    const Eigen::Array2d prior = nb->log_prior.exp();
    out << "prior " << labels.negative << ' ' << prior(0) << ", " << labels.positive << ' ' << prior(1) << '\n';
    out << std::setprecision(4);
    for (std::size_t j = 0; j < nb->attributes.size(); ++j) {
      const auto& a = nb->attributes[j];
      out << "  " << schema[j].name;
      if (a.nominal) {
        for (Eigen::Index v = 0; v < a.log_likelihood.cols(); ++v)
          out << "  [" << schema[j].values[static_cast<std::size_t>(v)] << ": " << std::exp(a.log_likelihood(0, v))
              << " | " << std::exp(a.log_likelihood(1, v)) << ']';
      } else {
        out << "  mean " << a.mean(0) << " | " << a.mean(1) << "  sd " << std::sqrt(a.variance(0)) << " | "
            << std::sqrt(a.variance(1));
      }
      out << '\n';
    }
  } else if (const auto* tree = std::get_if<DecisionTree>(&model.structure())) {
    out << "tree with " << tree->leaves() << " leaves, depth " << tree->depth();
    describe_node(out, model, *tree, 0, 0);
  } else if (const auto* rules = std::get_if<RuleList>(&model.structure())) {
    for (const auto& r : rules->rules) {
      out << '(';
      for (std::size_t c = 0; c < r.conditions.size(); ++c) {
        const auto& cond = r.conditions[c];
        if (c) out << " and ";
        out << schema[cond.attribute].name << ' ' << (cond.op == Condition::Op::equals ? "=" : op_token(cond.op))
            << ' ' << value_text(schema, cond.attribute, cond.value);
      }
      out << ") => " << (r.consequent == kPositive ? labels.positive : labels.negative) << ' '
          << counts_text(r.coverage) << '\n';
    }
    out << "() => " << (rules->default_class == kPositive ? labels.positive : labels.negative) << ' '
        << counts_text(rules->default_coverage) << '\n';
  }
  return out.str();
}

}  // namespace cascademl
