#include "cascademl/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

namespace cascademl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

/// Nominal cell lookup: exact label first, then numeric equality so that
/// "1.0" matches the label "1".
int nominal_code(const AttributeSchema& attr, std::string_view text) {
  if (int idx = attr.value_index(text); idx >= 0) return idx;
  double v;
  if (!parse_double(text, v)) return -1;
  for (int i = 0; i < attr.arity(); ++i) {
    double label;
    if (parse_double(attr.values[i], label) && label == v) return i;
  }
  return -1;
}

std::shared_ptr<const Schema> make_schema(Schema schema) {
  validate_schema(schema);
  return std::make_shared<const Schema>(std::move(schema));
}

}  // namespace

int AttributeSchema::value_index(std::string_view label) const {
  for (int i = 0; i < arity(); ++i)
    if (values[i] == label) return i;
  return -1;
}

void validate_schema(const Schema& schema) {
  std::set<std::string> names;
  for (const auto& attr : schema) {
    if (!names.insert(attr.name).second)
      throw std::invalid_argument("duplicate attribute name '" + attr.name + "'");
    if (attr.is_nominal()) {
      if (attr.values.empty())
        throw std::invalid_argument("nominal attribute '" + attr.name + "' has an empty domain");
      std::set<std::string> seen(attr.values.begin(), attr.values.end());
      if (seen.size() != attr.values.size())
        throw std::invalid_argument("nominal attribute '" + attr.name + "' repeats a value");
    }
  }
}

std::uint64_t schema_fingerprint(const Schema& schema) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    h ^= 0xFF;
    h *= 0x100000001B3ULL;
  };
  for (const auto& attr : schema) {
    feed(attr.name);
    feed(attr.is_nominal() ? "nominal" : "numeric");
    for (const auto& v : attr.values) feed(v);
  }
  return h;
}

DataTable::DataTable(std::shared_ptr<const Schema> schema, ClassLabels labels, CellMatrix cells,
                     Eigen::VectorXi classes, Eigen::VectorXd weights, std::vector<int> origin)
    : schema_(std::move(schema)),
      labels_(std::move(labels)),
      cells_(std::move(cells)),
      classes_(std::move(classes)),
      weights_(std::move(weights)),
      origin_(std::move(origin)) {
  if (!schema_) throw std::invalid_argument("DataTable: null schema");
  const auto n = cells_.rows();
  if (cells_.cols() != static_cast<Eigen::Index>(schema_->size()))
    throw std::invalid_argument("DataTable: cell columns do not match schema");
  if (classes_.size() != n) throw std::invalid_argument("DataTable: class column length mismatch");
  if (weights_.size() == 0) weights_ = Eigen::VectorXd::Ones(n);
  if (weights_.size() != n) throw std::invalid_argument("DataTable: weight column length mismatch");
  if ((weights_.array() < 0.0).any()) throw std::invalid_argument("DataTable: negative weight");
  if (origin_.empty()) {
    origin_.resize(n);
    std::iota(origin_.begin(), origin_.end(), 0);
  }
  if (static_cast<Eigen::Index>(origin_.size()) != n)
    throw std::invalid_argument("DataTable: origin length mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (classes_(i) != kNegative && classes_(i) != kPositive)
      throw std::invalid_argument("DataTable: class cell must be 0 or 1");
    check_instance(*schema_, row(static_cast<int>(i)));
  }
}

DataTable DataTable::subset(std::span<const int> rows) const {
  CellMatrix cells(static_cast<Eigen::Index>(rows.size()), cells_.cols());
  Eigen::VectorXi classes(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd weights(static_cast<Eigen::Index>(rows.size()));
  std::vector<int> origin(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int i = rows[r];
    if (i < 0 || i >= this->rows()) throw std::out_of_range("DataTable::subset: row index out of range");
    cells.row(static_cast<Eigen::Index>(r)) = cells_.row(i);
    classes(static_cast<Eigen::Index>(r)) = classes_(i);
    weights(static_cast<Eigen::Index>(r)) = weights_(i);
    origin[r] = origin_[i];
  }
  return DataTable(schema_, labels_, std::move(cells), std::move(classes), std::move(weights),
                   std::move(origin));
}

Eigen::Array2d DataTable::class_weights() const {
  Eigen::Array2d w = Eigen::Array2d::Zero();
  for (Eigen::Index i = 0; i < classes_.size(); ++i) w(classes_(i)) += weights_(i);
  return w;
}

Eigen::Array2i DataTable::class_counts() const {
  Eigen::Array2i c = Eigen::Array2i::Zero();
  for (Eigen::Index i = 0; i < classes_.size(); ++i) ++c(classes_(i));
  return c;
}

void check_instance(const Schema& schema, Instance instance) {
  if (instance.size() != schema.size())
    throw std::invalid_argument("instance has " + std::to_string(instance.size()) +
                                " cells, schema expects " + std::to_string(schema.size()));
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const double v = instance[j];
    if (is_missing(v)) continue;
    if (!std::isfinite(v))
      throw std::invalid_argument("attribute '" + schema[j].name + "' holds a non-finite value");
    if (schema[j].is_nominal() && (v != std::floor(v) || v < 0 || v >= schema[j].arity()))
      throw std::invalid_argument("attribute '" + schema[j].name + "' holds an invalid nominal code");
  }
}

FeatureMask::FeatureMask(std::vector<int> indices, int attribute_count)
    : indices_(std::move(indices)), attribute_count_(attribute_count) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (indices_.empty()) throw std::invalid_argument("FeatureMask: empty mask");
  if (indices_.front() < 0 || indices_.back() >= attribute_count)
    throw std::out_of_range("FeatureMask: attribute index out of range");
}

FeatureMask FeatureMask::full(int attribute_count) {
  std::vector<int> all(static_cast<std::size_t>(std::max(attribute_count, 0)));
  std::iota(all.begin(), all.end(), 0);
  return FeatureMask(std::move(all), attribute_count);
}

bool FeatureMask::contains(int attribute) const {
  return std::binary_search(indices_.begin(), indices_.end(), attribute);
}

FeatureMask FeatureMask::compose(const FeatureMask& inner) const {
  if (inner.attribute_count() != size())
    throw std::invalid_argument("FeatureMask::compose: inner mask does not index this projection");
  std::vector<int> out;
  out.reserve(inner.indices().size());
  for (int i : inner.indices()) out.push_back(indices_[i]);
  return FeatureMask(std::move(out), attribute_count_);
}

std::string FeatureMask::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(indices_[i]);
  }
  return s + "}";
}

std::vector<int> FoldPlan::test_rows(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> FoldPlan::train_rows(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(static_cast<int>(i));
  return out;
}

Schema cleveland_schema() {
  using A = AttributeSchema;
  return {
      A::numeric("age"),
      A::nominal("sex", {"0", "1"}),
      A::nominal("cp", {"1", "2", "3", "4"}),
      A::numeric("trestbps"),
      A::numeric("chol"),
      A::nominal("fbs", {"0", "1"}),
      A::nominal("restecg", {"0", "1", "2"}),
      A::numeric("thalach"),
      A::nominal("exang", {"0", "1"}),
      A::numeric("oldpeak"),
      A::nominal("slope", {"1", "2", "3"}),
      A::numeric("ca"),
      A::nominal("thal", {"3", "6", "7"}),
  };
}

namespace {

double parse_cell(const AttributeSchema& attr, std::string_view text, int line) {
  if (text == "?") return kMissing;
  if (attr.is_nominal()) {
    const int code = nominal_code(attr, text);
    if (code < 0)
      throw IngestionError("line " + std::to_string(line) + ", field '" + attr.name + "': value '" +
                               std::string(text) + "' is outside the nominal domain",
                           line, attr.name);
    return code;
  }
  double v;
  if (!parse_double(text, v))
    throw IngestionError("line " + std::to_string(line) + ", field '" + attr.name +
                             "': cannot parse '" + std::string(text) + "' as a number",
                         line, attr.name);
  return v;
}

LoadResult finish_load(std::shared_ptr<const Schema> schema, ClassLabels labels,
                       const std::vector<std::vector<double>>& rows, const std::vector<int>& classes) {
  if (rows.empty()) throw IngestionError("no data rows");
  CellMatrix cells(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(schema->size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) cells(i, j) = rows[i][j];
  Eigen::VectorXi cls = Eigen::Map<const Eigen::VectorXi>(classes.data(), static_cast<Eigen::Index>(classes.size()));
  DataTable raw(std::move(schema), std::move(labels), std::move(cells), std::move(cls));
  return impute_missing(raw);
}

}  // namespace

LoadResult load_cleveland(std::istream& source) {
  auto schema = make_schema(cleveland_schema());
  const std::size_t width = schema->size() + 1;
  std::vector<std::vector<double>> rows;
  std::vector<int> classes;
  std::string text;
  int line = 0;
  while (std::getline(source, text)) {
    ++line;
    const auto stripped = trim(text);
    if (stripped.empty()) continue;
    const auto fields = split(stripped, ',');
    if (fields.size() != width)
      throw IngestionError("line " + std::to_string(line) + ": expected " + std::to_string(width) +
                               " fields, found " + std::to_string(fields.size()),
                           line);
    std::vector<double> row(schema->size());
    for (std::size_t j = 0; j < schema->size(); ++j) row[j] = parse_cell((*schema)[j], fields[j], line);
    double num;
    if (!parse_double(fields.back(), num) || num != std::floor(num) || num < 0 || num > 4)
      throw IngestionError("line " + std::to_string(line) + ", field 'num': expected 0..4, found '" +
                               std::string(fields.back()) + "'",
                           line, "num");
    rows.push_back(std::move(row));
    classes.push_back(num == 0 ? kNegative : kPositive);
  }
  return finish_load(std::move(schema), ClassLabels{"absent", "present"}, rows, classes);
}

LoadResult load_cleveland_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  return load_cleveland(in);
}

SidecarSchema parse_schema_sidecar(std::istream& source) {
  SidecarSchema out;
  std::string text;
  int line = 0;
  int column = 0;
  while (std::getline(source, text)) {
    ++line;
    auto stripped = trim(text);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto colon = stripped.find(':');
    if (colon == std::string_view::npos)
      throw IngestionError("schema line " + std::to_string(line) + ": expected 'name: kind'", line);
    const std::string name(trim(stripped.substr(0, colon)));
    auto rest = trim(stripped.substr(colon + 1));
    const auto space = rest.find_first_of(" \t");
    const auto kind = rest.substr(0, space);
    const auto domain = space == std::string_view::npos ? std::string_view{} : trim(rest.substr(space));
    auto domain_values = [&] {
      std::vector<std::string> values;
      for (auto v : split(domain, ','))
        if (!v.empty()) values.emplace_back(v);
      return values;
    };
    if (kind == "numeric") {
      out.attributes.push_back(AttributeSchema::numeric(name));
    } else if (kind == "nominal") {
      out.attributes.push_back(AttributeSchema::nominal(name, domain_values()));
    } else if (kind == "class") {
      if (out.class_column >= 0)
        throw IngestionError("schema line " + std::to_string(line) + ": second class column", line, name);
      auto values = domain_values();
      if (values.size() != 2)
        throw IngestionError("schema line " + std::to_string(line) + ": class needs exactly two values",
                             line, name);
      out.class_column = column;
      out.labels = ClassLabels{values[0], values[1]};
    } else {
      throw IngestionError("schema line " + std::to_string(line) + ": unknown kind '" + std::string(kind) + "'",
                           line, name);
    }
    ++column;
  }
  if (out.class_column < 0) throw IngestionError("schema declares no class column");
  if (out.attributes.empty()) throw IngestionError("schema declares no attributes");
  try {
    validate_schema(out.attributes);
  } catch (const std::invalid_argument& e) {
    throw IngestionError(std::string("schema: ") + e.what());
  }
  return out;
}

LoadResult load_csv(std::istream& csv, const SidecarSchema& sidecar) {
  auto schema = make_schema(sidecar.attributes);
  const std::size_t width = schema->size() + 1;
  std::string text;
  int line = 0;
  bool header_seen = false;
  std::vector<std::vector<double>> rows;
  std::vector<int> classes;
  while (std::getline(csv, text)) {
    ++line;
    const auto stripped = trim(text);
    if (stripped.empty()) continue;
    const auto fields = split(stripped, ',');
    if (fields.size() != width)
      throw IngestionError("line " + std::to_string(line) + ": expected " + std::to_string(width) +
                               " fields, found " + std::to_string(fields.size()),
                           line);
    if (!header_seen) {
      header_seen = true;
      std::size_t a = 0;
      for (std::size_t c = 0; c < width; ++c) {
        if (static_cast<int>(c) == sidecar.class_column) continue;
        if (fields[c] != (*schema)[a].name)
          throw IngestionError("header column " + std::to_string(c + 1) + " is '" + std::string(fields[c]) +
                                   "', schema expects '" + (*schema)[a].name + "'",
                               line, (*schema)[a].name);
        ++a;
      }
      continue;
    }
    std::vector<double> row;
    row.reserve(schema->size());
    std::size_t a = 0;
    int cls = -1;
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<int>(c) == sidecar.class_column) {
        if (fields[c] == sidecar.labels.negative) cls = kNegative;
        else if (fields[c] == sidecar.labels.positive) cls = kPositive;
        else
          throw IngestionError("line " + std::to_string(line) + ": class value '" + std::string(fields[c]) +
                                   "' is not one of the declared labels",
                               line, "class");
        continue;
      }
      row.push_back(parse_cell((*schema)[a], fields[c], line));
      ++a;
    }
    rows.push_back(std::move(row));
    classes.push_back(cls);
  }
  return finish_load(std::move(schema), sidecar.labels, rows, classes);
}

LoadResult load_csv_files(const std::string& csv_path, const std::string& schema_path) {
  std::ifstream schema_in(schema_path);
  if (!schema_in) throw IngestionError("cannot open '" + schema_path + "'");
  std::ifstream csv_in(csv_path);
  if (!csv_in) throw IngestionError("cannot open '" + csv_path + "'");
  return load_csv(csv_in, parse_schema_sidecar(schema_in));
}

LoadResult impute_missing(const DataTable& table) {
  CellMatrix cells = table.cells();
  int imputed = 0;
  for (int j = 0; j < table.attributes(); ++j) {
    const auto& attr = table.schema()[j];
    std::vector<double> known;
    for (int i = 0; i < table.rows(); ++i)
      if (!is_missing(cells(i, j))) known.push_back(cells(i, j));
    if (static_cast<int>(known.size()) == table.rows()) continue;
    double fill = 0.0;
    if (attr.is_nominal()) {
      std::vector<int> counts(attr.values.size(), 0);
      for (double v : known) ++counts[static_cast<std::size_t>(v)];
      fill = static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    } else if (!known.empty()) {
      std::sort(known.begin(), known.end());
      const std::size_t m = known.size() / 2;
      fill = known.size() % 2 ? known[m] : 0.5 * (known[m - 1] + known[m]);
    }
    for (int i = 0; i < table.rows(); ++i)
      if (is_missing(cells(i, j))) {
        cells(i, j) = fill;
        ++imputed;
      }
  }
  if (imputed == 0) return {table, 0};
  DataTable out(table.schema_ptr(), table.class_labels(), std::move(cells), table.labels(), table.weights(),
                std::vector<int>(table.origin().begin(), table.origin().end()));
  return {std::move(out), imputed};
}

FoldPlan stratified_folds(const DataTable& table, int k, Seed seed, bool stratified) {
  if (k < 2) throw std::invalid_argument("stratified_folds: k must be at least 2");
  if (k > table.rows()) throw std::invalid_argument("stratified_folds: k exceeds the row count");
  Rng rng(seed);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(table.rows()));
  if (stratified) {
    for (int cls : {kNegative, kPositive}) {
      std::vector<int> members;
      for (int i = 0; i < table.rows(); ++i)
        if (table.label(i) == cls) members.push_back(i);
      rng.shuffle(std::span<int>(members));
      order.insert(order.end(), members.begin(), members.end());
    }
  } else {
    order.resize(static_cast<std::size_t>(table.rows()));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));
  }
  FoldPlan plan{k, std::vector<int>(order.size()), seed};
  for (std::size_t p = 0; p < order.size(); ++p) plan.assignments[order[p]] = static_cast<int>(p % k);
  return plan;
}

DataTable bootstrap_sample(const DataTable& table, Seed seed) {
  if (table.empty()) throw std::invalid_argument("bootstrap_sample: empty table");
  Rng rng(seed);
  std::vector<int> rows(static_cast<std::size_t>(table.rows()));
  for (auto& r : rows) r = static_cast<int>(rng.below(static_cast<std::uint64_t>(table.rows())));
  return table.subset(rows);
}

int subspace_size(int attribute_count, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("random_subspace: fraction must lie in (0, 1]");
  const int size = static_cast<int>(std::floor(fraction * attribute_count + 0.5));
  return std::clamp(size, 1, attribute_count);
}

FeatureMask random_subspace(const Schema& schema, double fraction, Seed seed) {
  const int m = static_cast<int>(schema.size());
  if (m == 0) throw std::invalid_argument("random_subspace: empty schema");
  const int size = subspace_size(m, fraction);
  std::vector<int> all(static_cast<std::size_t>(m));
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates: the first `size` slots are a uniform draw.
  Rng rng(seed);
  for (int i = 0; i < size; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - i)));
    std::swap(all[i], all[j]);
  }
  all.resize(static_cast<std::size_t>(size));
  return FeatureMask(std::move(all), m);
}

Schema project(const Schema& schema, const FeatureMask& mask) {
  if (mask.attribute_count() != static_cast<int>(schema.size()))
    throw std::out_of_range("project: mask does not fit the schema");
  Schema out;
  for (int j : mask.indices()) out.push_back(schema[j]);
  return out;
}

DataTable project(const DataTable& table, const FeatureMask& mask) {
  if (mask.attribute_count() != table.attributes())
    throw std::out_of_range("project: mask does not fit the table");
  if (mask.is_full()) return table;
  std::vector<Eigen::Index> cols(mask.indices().begin(), mask.indices().end());
  CellMatrix cells = table.cells()(Eigen::all, cols);
  return DataTable(std::make_shared<const Schema>(project(table.schema(), mask)), table.class_labels(),
                   std::move(cells), table.labels(), table.weights(),
                   std::vector<int>(table.origin().begin(), table.origin().end()));
}

std::vector<double> project(Instance instance, const FeatureMask& mask) {
  if (mask.attribute_count() != static_cast<int>(instance.size()))
    throw std::out_of_range("project: mask does not fit the instance");
  std::vector<double> out;
  out.reserve(mask.indices().size());
  for (int j : mask.indices()) out.push_back(instance[j]);
  return out;
}

}  // namespace cascademl
