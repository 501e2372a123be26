#include "cascademl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace cascademl {

Seed fold_plan_seed(Seed master, int run) { return derive_seed(master, {static_cast<std::uint64_t>(run)}); }

Seed cell_seed(Seed master, int run, int fold) {
  return derive_seed(master, {static_cast<std::uint64_t>(run), static_cast<std::uint64_t>(fold), 1});
}

namespace {

std::optional<FeatureMask> selected_mask(const MemberModel& model) {
  if (const auto* s = std::get_if<SelectedModel>(&model)) return s->mask;
  if (const auto* c = std::get_if<CascadeModel>(&model)) return c->base_mask();
  return std::nullopt;
}

void fill_label_metrics(FoldResult& r, const LabelVector& truth, const LabelVector& predicted,
                        const ScoreVector& score) {
  const ConfusionCounts counts = confusion(truth, predicted);
  r.accuracy = accuracy(counts);
  r.tn_rate = specificity(counts);
  r.tp_rate = sensitivity(counts);
  r.roc_auc = roc_auc(score, truth);
}

}  // namespace

FoldResult evaluate_method(const ExperimentConfig& config, const MethodConfig& method, const DataTable& train,
                           const DataTable& test, Seed seed) {
  if (test.empty()) throw std::invalid_argument("evaluate_method: empty test fold");
  const MemberSpec spec = config.member_spec(method);
  const Eigen::Index n = test.rows();
  const LabelVector& truth = test.labels();
  LabelVector predicted(n);
  ScoreVector score(n);
  FoldResult r;

  if (!method.is_ensemble()) {
    const MemberModel model = train_member(spec, train, seed);
    for (int i = 0; i < n; ++i) {
      const Distribution d = predict_member(model, test.row(i));
      predicted(i) = predicted_label(d);
      score(i) = d(kPositive);
    }
    if (auto mask = selected_mask(model)) r.selected_masks.push_back(std::move(*mask));
    fill_label_metrics(r, truth, predicted, score);
    return r;
  }

  const EnsembleModel ensemble =
      method.wrapper == Wrapper::bagging
          ? train_bagging(spec, train, config.members, seed, config.label_fusion)
          : train_random_subspace(spec, train, config.members, config.subspace_fraction, seed, config.label_fusion);
  const auto members = static_cast<Eigen::Index>(ensemble.members.size());
  CorrectnessMatrix correct(n, members);
  for (int i = 0; i < n; ++i) {
    const auto d = member_distributions(ensemble, test.row(i));
    for (Eigen::Index m = 0; m < members; ++m) correct(i, m) = predicted_label(d[m]) == truth(i);
    predicted(i) = predicted_label(fuse_distributions(d, config.label_fusion));
    score(i) = fuse_distributions(d, config.score_fusion)(kPositive);
  }
  fill_label_metrics(r, truth, predicted, score);
  r.member_accuracy = member_mean_accuracy(correct);
  if (members >= 2) r.kw_variance = kw_variance(correct);
  for (const auto& m : ensemble.members) {
    if (method.wrapper == Wrapper::random_subspace) r.subspace_masks.push_back(m.mask);
    if (auto mask = selected_mask(m.model)) r.selected_masks.push_back(m.mask.compose(*mask));
  }
  return r;
}

LoadResult load_dataset(const ExperimentConfig& config) {
  if (config.format == DataFormat::cleveland) return load_cleveland_file(config.data.string());
  return load_csv_files(config.data.string(), config.schema.string());
}

MetricSummary summarize(const std::vector<std::optional<double>>& values, const std::vector<int>& runs,
                        Aggregation aggregation) {
  if (values.size() != runs.size()) throw std::invalid_argument("summarize: one run index per value expected");
  std::vector<double> points;
  if (aggregation == Aggregation::fold_mean) {
    for (const auto& v : values)
      if (v) points.push_back(*v);
  } else {
    std::map<int, std::pair<double, int>> per_run;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i]) {
        auto& [sum, count] = per_run[runs[i]];
        sum += *values[i];
        ++count;
      }
    for (const auto& [_, sc] : per_run) points.push_back(sc.first / sc.second);
  }
  MetricSummary s;
  s.count = static_cast<int>(std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); }));
  if (points.empty()) {
    s.mean = s.sd = s.min = s.max = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double n = static_cast<double>(points.size());
  s.mean = std::accumulate(points.begin(), points.end(), 0.0) / n;
  double ss = 0.0;
  for (double p : points) ss += (p - s.mean) * (p - s.mean);
  s.sd = points.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end());
  s.min = *lo;
  s.max = *hi;
  // Rounding can push the mean a hair outside the observed range.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

MethodReport summarize_method(const MethodConfig& method, const std::vector<FoldResult>& folds, int attributes,
                              Aggregation aggregation) {
  MethodReport m;
  m.method = method;
  std::vector<int> runs;
  for (const auto& f : folds) runs.push_back(f.run);
  auto column = [&](auto get) {
    std::vector<std::optional<double>> v;
    for (const auto& f : folds) v.push_back(get(f));
    return summarize(v, runs, aggregation);
  };
  m.accuracy = column([](const FoldResult& f) -> std::optional<double> { return f.accuracy; });
  m.roc_auc = column([](const FoldResult& f) { return f.roc_auc; });
  m.tn_rate = column([](const FoldResult& f) { return f.tn_rate; });
  m.tp_rate = column([](const FoldResult& f) { return f.tp_rate; });
  if (method.is_ensemble()) {
    m.member_accuracy = column([](const FoldResult& f) { return f.member_accuracy; });
    const auto kw = column([](const FoldResult& f) { return f.kw_variance; });
    if (kw.count > 0) m.kw_variance = kw;
  }
  std::vector<int> hits(static_cast<std::size_t>(attributes), 0);
  for (const auto& f : folds)
    for (const auto& mask : f.selected_masks) {
      ++m.selections;
      for (int j : mask.indices()) ++hits[static_cast<std::size_t>(j)];
    }
  if (m.selections > 0)
    for (int h : hits) m.selection_frequency.push_back(static_cast<double>(h) / m.selections);
  return m;
}

}  // namespace

EvaluationReport run_experiment(const ExperimentConfig& config, const LoadResult& data, const RunOptions& options) {
  config.validate();
  const DataTable& table = data.table;
  if (config.folds > table.rows()) throw ConfigError("[experiment] folds exceeds the number of rows");

  std::vector<FoldPlan> plans;
  for (int r = 0; r < config.runs; ++r)
    plans.push_back(stratified_folds(table, config.folds, fold_plan_seed(config.seed, r), config.stratified));

  const std::size_t methods = config.methods.size();
  const int cells = config.runs * config.folds;
  std::vector<std::vector<FoldResult>> results(methods, std::vector<FoldResult>(static_cast<std::size_t>(cells)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cells));
  std::atomic<int> next{0};

  auto worker = [&] {
    for (int cell = next++; cell < cells; cell = next++) {
      const int run = cell / config.folds;
      const int fold = cell % config.folds;
      const auto& plan = plans[static_cast<std::size_t>(run)];
      std::size_t m = 0;
      try {
        const DataTable train = table.subset(plan.train_rows(fold));
        const DataTable test = table.subset(plan.test_rows(fold));
        FoldTrace trace{run, fold, {train.origin().begin(), train.origin().end()},
                        {test.origin().begin(), test.origin().end()}};
        std::vector<int> a = trace.train_origin, b = trace.test_origin;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::vector<int> shared;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
        if (!shared.empty()) throw std::logic_error("test row " + std::to_string(shared.front()) + " is in the training split");
        if (options.on_fold) options.on_fold(trace);
        const Seed seed = cell_seed(config.seed, run, fold);
        for (m = 0; m < methods; ++m) {
          FoldResult r = evaluate_method(config, config.methods[m], train, test, seed);
          r.run = run;
          r.fold = fold;
          results[m][static_cast<std::size_t>(cell)] = std::move(r);
        }
      } catch (const std::exception& e) {
        const std::string where = m < methods ? "method " + config.methods[m].token() + ", " : std::string();
        errors[static_cast<std::size_t>(cell)] = std::make_exception_ptr(std::runtime_error(
            where + "run " + std::to_string(run + 1) + ", fold " + std::to_string(fold + 1) + ": " + e.what()));
        next = cells;  // stop handing out work
      }
    }
  };

  const int jobs = std::max(1, std::min(options.jobs, cells));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  EvaluationReport report;
  auto& p = report.provenance;
  p.seed = config.seed;
  p.config_hash = config_hash(config);
  p.timestamp = utc_timestamp();
  p.dataset = config.data.filename().string();
  p.rows = table.rows();
  p.attributes = table.attributes();
  p.imputed_cells = data.imputed_cells;
  p.runs = config.runs;
  p.folds = config.folds;
  p.members = config.members;
  p.aggregation = config.aggregation;
  p.label_fusion = config.label_fusion;
  p.score_fusion = config.score_fusion;
  for (const auto& a : table.schema()) report.attribute_names.push_back(a.name);
  for (std::size_t m = 0; m < methods; ++m)
    report.methods.push_back(summarize_method(config.methods[m], results[m], table.attributes(), config.aggregation));
  report.folds = std::move(results);
  return report;
}

EvaluationReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  return run_experiment(config, load_dataset(config), options);
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  throw std::invalid_argument("unknown report format '" + std::string(name) + "'");
}

namespace {

std::string fixed(double v, int digits = 5) {
  if (std::isnan(v)) return "NA";
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + '"';
}

void emit_csv(std::ostream& out, const EvaluationReport& report) {
  out << "method,accuracy,accuracy_sd,roc_auc,roc_auc_sd,tn_rate,tn_rate_sd,tp_rate,tp_rate_sd,"
         "member_accuracy,member_accuracy_sd,kw_variance,kw_variance_sd\n";
  for (const auto& m : report.methods) {
    out << csv_field(m.method.display_name());
    for (const auto* s : {&m.accuracy, &m.roc_auc, &m.tn_rate, &m.tp_rate}) out << ',' << fixed(s->mean) << ',' << fixed(s->sd);
    for (const auto& s : {m.member_accuracy, m.kw_variance}) {
      if (s) out << ',' << fixed(s->mean) << ',' << fixed(s->sd);
      else out << ",,";
    }
    out << '\n';
  }
}

void emit_markdown(std::ostream& out, const EvaluationReport& report) {
  const auto& p = report.provenance;
  out << "# Evaluation report\n\n";
  out << "- generated: " << p.timestamp << '\n';
  out << "- dataset: " << p.dataset << " (" << p.rows << " rows, " << p.attributes << " attributes, " << p.imputed_cells
      << " imputed cells)\n";
  out << "- protocol: " << p.runs << " x " << p.folds << "-fold cross-validation, " << p.members
      << " ensemble members\n";
  out << "- seed: " << p.seed << ", config hash: " << std::hex << std::setw(16) << std::setfill('0') << p.config_hash
      << std::dec << std::setfill(' ') << '\n';
  out << "- aggregation: " << to_string(p.aggregation) << "; ensemble labels by " << to_string(p.label_fusion)
      << ", ROC scores by " << to_string(p.score_fusion) << "\n\n";

  out << "## Result summary\n\n";
  out << "| Method | Accuracy (%) | ROC AUC | TN Rate | TP Rate |\n|---|---:|---:|---:|---:|\n";
  for (const auto& m : report.methods)
    out << "| " << m.method.display_name() << " | " << fixed(m.accuracy.mean) << " ± " << fixed(m.accuracy.sd) << " | "
        << fixed(m.roc_auc.mean) << " ± " << fixed(m.roc_auc.sd) << " | " << fixed(m.tn_rate.mean) << " ± "
        << fixed(m.tn_rate.sd) << " | " << fixed(m.tp_rate.mean) << " ± " << fixed(m.tp_rate.sd) << " |\n";

  const bool any_ensemble = std::any_of(report.methods.begin(), report.methods.end(),
                                        [](const auto& m) { return m.member_accuracy.has_value(); });
  if (any_ensemble) {
    out << "\n## Accuracy and diversity\n\n";
    out << "| Method | KW variance | Member accuracy (%) |\n|---|---:|---:|\n";
    for (const auto& m : report.methods) {
      if (!m.member_accuracy) continue;
      out << "| " << m.method.display_name() << " | "
          << (m.kw_variance ? fixed(m.kw_variance->mean) + " ± " + fixed(m.kw_variance->sd) : std::string("NA"))
          << " | " << fixed(m.member_accuracy->mean) << " ± " << fixed(m.member_accuracy->sd) << " |\n";
    }
  }

  const bool any_selection =
      std::any_of(report.methods.begin(), report.methods.end(), [](const auto& m) { return m.selections > 0; });
  if (any_selection) {
    out << "\n## Feature selection frequency\n\nShare of CFS+GA masks that kept each attribute.\n\n| Method | masks |";
    for (const auto& name : report.attribute_names) out << ' ' << name << " |";
    out << "\n|---|---:|";
    for (std::size_t j = 0; j < report.attribute_names.size(); ++j) out << "---:|";
    out << '\n';
    for (const auto& m : report.methods) {
      if (m.selections == 0) continue;
      out << "| " << m.method.display_name() << " | " << m.selections << " |";
      for (double f : m.selection_frequency) out << ' ' << fixed(f, 3) << " |";
      out << '\n';
    }
  }
}

}  // namespace

void emit_report(std::ostream& out, const EvaluationReport& report, ReportFormat format) {
  if (report.methods.empty()) throw std::invalid_argument("emit_report: the report has no methods");
  if (format == ReportFormat::csv) emit_csv(out, report);
  else emit_markdown(out, report);
}

std::string emit_report(const EvaluationReport& report, ReportFormat format) {
  std::ostringstream out;
  emit_report(out, report, format);
  return out.str();
}

void write_mask_log(std::ostream& out, const EvaluationReport& report) {
  out << "method,run,fold,kind,mask\n";
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const auto name = report.methods[m].method.display_name();
    for (const auto& f : report.folds[m]) {
      for (const auto& mask : f.subspace_masks)
        out << name << ',' << f.run + 1 << ',' << f.fold + 1 << ",subspace,\"" << mask.to_string() << "\"\n";
      for (const auto& mask : f.selected_masks)
        out << name << ',' << f.run + 1 << ',' << f.fold + 1 << ",selected,\"" << mask.to_string() << "\"\n";
    }
  }
}

}  // namespace cascademl
