#include "cascademl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace cascademl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string qualified(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

}  // namespace

ConfigDocument ConfigDocument::parse(std::istream& in) {
  ConfigDocument doc;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = raw;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", line);
      for (char c : section)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
          throw ConfigError("invalid section name '" + section + "'", line);
      if (doc.section_lines_.count(section)) throw ConfigError("duplicate section [" + section + "]", line);
      doc.section_lines_[section] = line;
      doc.sections_[section];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    if (section.empty()) throw ConfigError("setting outside any section", line);
    const std::string key = trim(std::string_view(text).substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", line);
    auto& entries = doc.sections_[section];
    if (entries.count(key)) throw ConfigError("duplicate key " + qualified(section, key), line);
    entries[key] = Entry{trim(std::string_view(text).substr(eq + 1)), line};
  }
  return doc;
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key);
}

std::optional<std::string> ConfigDocument::get(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto e = s->second.find(key);
  if (e == s->second.end()) return std::nullopt;
  return e->second.value;
}

int ConfigDocument::line_of(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return 0;
  const auto e = s->second.find(key);
  return e == s->second.end() ? 0 : e->second.line;
}

std::string ConfigDocument::get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

long long ConfigDocument::get_int(const std::string& section, const std::string& key, long long fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size())
    throw ConfigError(qualified(section, key) + ": expected an integer, got '" + *v + "'", line_of(section, key));
  return out;
}

double ConfigDocument::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size())
    throw ConfigError(qualified(section, key) + ": expected a number, got '" + *v + "'", line_of(section, key));
  return out;
}

bool ConfigDocument::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  throw ConfigError(qualified(section, key) + ": expected true or false, got '" + *v + "'", line_of(section, key));
}

std::vector<std::string> ConfigDocument::get_list(const std::string& section, const std::string& key) const {
  std::vector<std::string> out;
  const auto v = get(section, key);
  if (!v) return out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(qualified(section, key) + ": empty list item", line_of(section, key));
    out.push_back(item);
  }
  return out;
}

void ConfigDocument::reject_unknown(const std::map<std::string, std::set<std::string>>& known) const {
  for (const auto& [section, entries] : sections_) {
    const auto k = known.find(section);
    if (k == known.end()) throw ConfigError("unknown section [" + section + "]", section_lines_.at(section));
    for (const auto& [key, entry] : entries)
      if (!k->second.count(key)) throw ConfigError("unknown key " + qualified(section, key), entry.line);
  }
}

std::string to_string(Aggregation a) { return a == Aggregation::fold_mean ? "fold_mean" : "run_mean"; }

std::string MethodConfig::token() const {
  std::string t;
  if (wrapper == Wrapper::bagging) t = "bagging:";
  else if (wrapper == Wrapper::random_subspace) t = "subspace:";
  return t + (cascade ? "cascade_" : "") + to_string(algorithm);
}

std::string MethodConfig::display_name() const {
  std::string name;
  if (wrapper == Wrapper::bagging) name = "Bg-";
  else if (wrapper == Wrapper::random_subspace) name = "Rs-";
  if (cascade) name += "C_";
  switch (algorithm) {
    case Algorithm::naive_bayes: return name + "NB";
    case Algorithm::c45: return name + "C4.5";
    case Algorithm::ripper: return name + "RPR";
  }
  return name;
}

MethodConfig parse_method(const std::string& token) {
  MethodConfig m;
  std::string_view rest = token;
  if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
    const auto wrapper = rest.substr(0, colon);
    if (wrapper == "bagging") m.wrapper = Wrapper::bagging;
    else if (wrapper == "subspace" || wrapper == "random_subspace") m.wrapper = Wrapper::random_subspace;
    else throw ConfigError("unknown ensemble wrapper '" + std::string(wrapper) + "' in method '" + token + "'");
    rest = rest.substr(colon + 1);
  }
  if (rest.starts_with("cascade_")) {
    m.cascade = true;
    rest.remove_prefix(8);
  }
  try {
    m.algorithm = parse_algorithm(rest);
  } catch (const std::invalid_argument&) {
    throw ConfigError("unknown method '" + token + "'");
  }
  if (m.cascade && m.algorithm == Algorithm::naive_bayes)
    throw ConfigError("method '" + token + "': the cascade meta level must be c45 or ripper");
  return m;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("[experiment] methods: at least one method is required");
  if (runs < 1) throw ConfigError("[experiment] runs must be at least 1");
  if (folds < 2) throw ConfigError("[experiment] folds must be at least 2");
  if (members < 1) throw ConfigError("[experiment] members must be at least 1");
  if (!(subspace_fraction > 0) || subspace_fraction > 1)
    throw ConfigError("[experiment] subspace_fraction must lie in (0, 1]");
  if (format == DataFormat::csv && schema.empty()) throw ConfigError("[experiment] schema is required for csv data");
  if (selection.bins < 1) throw ConfigError("[feature_selection] bins must be positive");
  try {
    learner(Algorithm::c45).validate();
    selection.ga.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

LearnerSpec ExperimentConfig::learner(Algorithm algorithm) const {
  LearnerSpec spec = LearnerSpec::of(algorithm);
  spec.naive_bayes = naive_bayes;
  spec.c45 = c45;
  spec.ripper = ripper;
  return spec;
}

MemberSpec ExperimentConfig::member_spec(const MethodConfig& method) const {
  if (method.cascade) {
    CascadeSpec spec;
    spec.base = learner(Algorithm::naive_bayes);
    spec.meta = learner(method.algorithm);
    spec.selection = selection;
    spec.meta_attributes = meta_attributes;
    return spec;
  }
  PlainSpec plain{learner(method.algorithm), std::nullopt};
  if (method.algorithm == Algorithm::naive_bayes && naive_bayes_selection) plain.selection = selection;
  return plain;
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"experiment",
       {"data", "format", "schema", "methods", "runs", "folds", "members", "seed", "subspace_fraction", "stratified",
        "aggregation", "label_fusion", "score_fusion"}},
      {"cascade", {"meta_attributes"}},
      {"naive_bayes", {"variance_floor", "select_features"}},
      {"c45", {"confidence", "min_objects", "prune", "collapse", "numeric_split_fraction", "mdl_correction"}},
      {"ripper", {"folds", "optimizations", "dl_slack_bits", "max_error_rate", "min_coverage", "prune"}},
      {"feature_selection", {"bins"}},
      {"feature_selection.ga", {"population", "generations", "crossover", "mutation", "elitism"}},
  };
  return keys;
}

int to_int(long long v, const char* what) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(std::string(what) + " is out of range");
  return static_cast<int>(v);
}

template <typename F>
auto rethrow_as_config(const std::string& section, const std::string& key, const ConfigDocument& doc, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + section + "] " + key + ": " + e.what(), doc.line_of(section, key));
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir) {
  const ConfigDocument doc = ConfigDocument::parse(in);
  doc.reject_unknown(known_keys());
  ExperimentConfig c;

  const std::string e = "experiment";
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  if (const auto data = doc.get(e, "data")) c.data = resolve(*data);
  else throw ConfigError("[experiment] data is required");
  const auto format = doc.get_string(e, "format", "cleveland");
  if (format == "cleveland") c.format = DataFormat::cleveland;
  else if (format == "csv") c.format = DataFormat::csv;
  else throw ConfigError("[experiment] format: expected cleveland or csv", doc.line_of(e, "format"));
  if (const auto schema = doc.get(e, "schema")) c.schema = resolve(*schema);
  for (const auto& token : doc.get_list(e, "methods")) {
    try {
      c.methods.push_back(parse_method(token));
    } catch (const ConfigError& err) {
      throw ConfigError(err.what(), doc.line_of(e, "methods"));
    }
  }
  c.runs = to_int(doc.get_int(e, "runs", c.runs), "runs");
  c.folds = to_int(doc.get_int(e, "folds", c.folds), "folds");
  c.members = to_int(doc.get_int(e, "members", c.members), "members");
  const long long seed = doc.get_int(e, "seed", static_cast<long long>(c.seed));
  if (seed < 0) throw ConfigError("[experiment] seed must be non-negative", doc.line_of(e, "seed"));
  c.seed = static_cast<Seed>(seed);
  c.subspace_fraction = doc.get_double(e, "subspace_fraction", c.subspace_fraction);
  c.stratified = doc.get_bool(e, "stratified", c.stratified);
  const auto aggregation = doc.get_string(e, "aggregation", "fold_mean");
  if (aggregation == "fold_mean") c.aggregation = Aggregation::fold_mean;
  else if (aggregation == "run_mean") c.aggregation = Aggregation::run_mean;
  else throw ConfigError("[experiment] aggregation: expected fold_mean or run_mean", doc.line_of(e, "aggregation"));
  c.label_fusion = rethrow_as_config(e, "label_fusion", doc,
                                     [&] { return parse_fusion(doc.get_string(e, "label_fusion", "majority_vote")); });
  c.score_fusion = rethrow_as_config(
      e, "score_fusion", doc, [&] { return parse_fusion(doc.get_string(e, "score_fusion", "average_probability")); });

  c.meta_attributes = rethrow_as_config("cascade", "meta_attributes", doc, [&] {
    return parse_meta_attributes(doc.get_string("cascade", "meta_attributes", "all"));
  });

  c.naive_bayes.variance_floor = doc.get_double("naive_bayes", "variance_floor", c.naive_bayes.variance_floor);
  c.naive_bayes_selection = doc.get_bool("naive_bayes", "select_features", c.naive_bayes_selection);

  c.c45.confidence = doc.get_double("c45", "confidence", c.c45.confidence);
  c.c45.min_objects = to_int(doc.get_int("c45", "min_objects", c.c45.min_objects), "min_objects");
  c.c45.prune = doc.get_bool("c45", "prune", c.c45.prune);
  c.c45.collapse = doc.get_bool("c45", "collapse", c.c45.collapse);
  c.c45.numeric_split_fraction = doc.get_double("c45", "numeric_split_fraction", c.c45.numeric_split_fraction);
  c.c45.mdl_correction = doc.get_bool("c45", "mdl_correction", c.c45.mdl_correction);

  c.ripper.folds = to_int(doc.get_int("ripper", "folds", c.ripper.folds), "folds");
  c.ripper.optimizations = to_int(doc.get_int("ripper", "optimizations", c.ripper.optimizations), "optimizations");
  c.ripper.dl_slack_bits = doc.get_double("ripper", "dl_slack_bits", c.ripper.dl_slack_bits);
  c.ripper.max_error_rate = doc.get_double("ripper", "max_error_rate", c.ripper.max_error_rate);
  c.ripper.min_coverage = doc.get_double("ripper", "min_coverage", c.ripper.min_coverage);
  c.ripper.prune = doc.get_bool("ripper", "prune", c.ripper.prune);

  c.selection.bins = to_int(doc.get_int("feature_selection", "bins", c.selection.bins), "bins");
  const std::string ga = "feature_selection.ga";
  c.selection.ga.population = to_int(doc.get_int(ga, "population", c.selection.ga.population), "population");
  c.selection.ga.generations = to_int(doc.get_int(ga, "generations", c.selection.ga.generations), "generations");
  c.selection.ga.crossover = doc.get_double(ga, "crossover", c.selection.ga.crossover);
  c.selection.ga.mutation = doc.get_double(ga, "mutation", c.selection.ga.mutation);
  c.selection.ga.elitism = to_int(doc.get_int(ga, "elitism", c.selection.ga.elitism), "elitism");

  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_experiment_config(in, path.parent_path());
}

namespace {

std::string bool_text(bool b) { return b ? "true" : "false"; }

void write_settings(std::ostream& out, const ExperimentConfig& c, bool with_paths) {
  out << "[experiment]\n";
  if (with_paths) {
    out << "data = " << c.data.string() << '\n';
    if (!c.schema.empty()) out << "schema = " << c.schema.string() << '\n';
  }
  out << "format = " << (c.format == DataFormat::cleveland ? "cleveland" : "csv") << '\n';
  out << "methods = ";
  for (std::size_t i = 0; i < c.methods.size(); ++i) out << (i ? ", " : "") << c.methods[i].token();
  out << '\n';
  out << "runs = " << c.runs << "\nfolds = " << c.folds << "\nmembers = " << c.members << "\nseed = " << c.seed
      << "\nsubspace_fraction = " << format_double(c.subspace_fraction) << "\nstratified = " << bool_text(c.stratified)
      << "\naggregation = " << to_string(c.aggregation) << "\nlabel_fusion = " << to_string(c.label_fusion)
      << "\nscore_fusion = " << to_string(c.score_fusion) << "\n\n";
  out << "[cascade]\nmeta_attributes = " << to_string(c.meta_attributes) << "\n\n";
  out << "[naive_bayes]\nvariance_floor = " << format_double(c.naive_bayes.variance_floor)
      << "\nselect_features = " << bool_text(c.naive_bayes_selection) << "\n\n";
  out << "[c45]\nconfidence = " << format_double(c.c45.confidence) << "\nmin_objects = " << c.c45.min_objects
      << "\nprune = " << bool_text(c.c45.prune) << "\ncollapse = " << bool_text(c.c45.collapse)
      << "\nnumeric_split_fraction = " << format_double(c.c45.numeric_split_fraction)
      << "\nmdl_correction = " << bool_text(c.c45.mdl_correction) << "\n\n";
  out << "[ripper]\nfolds = " << c.ripper.folds << "\noptimizations = " << c.ripper.optimizations
      << "\ndl_slack_bits = " << format_double(c.ripper.dl_slack_bits)
      << "\nmax_error_rate = " << format_double(c.ripper.max_error_rate)
      << "\nmin_coverage = " << format_double(c.ripper.min_coverage) << "\nprune = " << bool_text(c.ripper.prune)
      << "\n\n";
  out << "[feature_selection]\nbins = " << c.selection.bins << "\n\n";
  out << "[feature_selection.ga]\npopulation = " << c.selection.ga.population
      << "\ngenerations = " << c.selection.ga.generations << "\ncrossover = " << format_double(c.selection.ga.crossover)
      << "\nmutation = " << format_double(c.selection.ga.mutation) << "\nelitism = " << c.selection.ga.elitism << '\n';
}

}  // namespace

std::string canonical_config(const ExperimentConfig& config) {
  std::ostringstream out;
  write_settings(out, config, true);
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  // Paths are left out so the hash identifies the protocol, not the checkout.
  std::ostringstream out;
  write_settings(out, config, false);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : out.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<MethodConfig> paper_methods() {
  std::vector<MethodConfig> out;
  for (bool cascade : {false, true})
    for (Algorithm a : {Algorithm::ripper, Algorithm::c45})
      for (Wrapper w : {Wrapper::none, Wrapper::bagging, Wrapper::random_subspace}) out.push_back({w, cascade, a});
  out.push_back({Wrapper::none, false, Algorithm::naive_bayes});
  return out;
}

ExperimentConfig paper_config(const std::filesystem::path& data) {
  ExperimentConfig c;
  c.data = data;
  c.methods = paper_methods();
  return c;
}

}  // namespace cascademl
