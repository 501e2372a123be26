// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Criteria 1-5 come from one full run of the packaged paper.config
// (13 methods, 25 x 10-fold CV, 30 members). Criterion 11 spawns the CLI twice.

#include <CLI11.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cascademl/cascade.hpp"
#include "cascademl/ensemble.hpp"
#include "cascademl/harness.hpp"
#include "support.hpp"

using namespace cascademl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, const Verdict& v) {
  if (!v.pass) ++failures;
  std::cout << "criterion " << std::setw(2) << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << title;
  if (!v.detail.empty()) std::cout << "  [" << v.detail << "]";
  std::cout << std::endl;
}

std::string num(double v, int digits = 2) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

const MethodReport& method(const EvaluationReport& r, const std::string& name) {
  for (const auto& m : r.methods)
    if (m.method.display_name() == name) return m;
  throw std::runtime_error("method " + name + " missing from the report");
}

void within(Verdict& v, const std::string& label, double got, double target, double tol, int digits = 2) {
  const bool ok = std::abs(got - target) <= tol;
  if (!v.detail.empty()) v.detail += "; ";
  v.detail += label + " " + num(got, digits) + " vs " + num(target, digits) + " +/- " + num(tol, digits);
  if (!ok) {
    v.pass = false;
    v.detail += " OUT";
  }
}

void greater(Verdict& v, const EvaluationReport& r, const std::string& a, const std::string& b) {
  const double x = method(r, a).accuracy.mean, y = method(r, b).accuracy.mean;
  if (!v.detail.empty()) v.detail += "; ";
  v.detail += a + " " + num(x) + " > " + b + " " + num(y);
  if (!(x > y)) {
    v.pass = false;
    v.detail += " NO";
  }
}

// ---- criterion 7 --------------------------------------------------------

Verdict oracle_agreement() {
  Verdict v;
  std::mt19937_64 gen(700);
  int gain = 0, nb = 0, merit = 0, fusion = 0, metric = 0;
  double worst = 0;
  auto track = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };

  while (gain < 1000) {
    support::TableShape shape;
    shape.rows = 2 + static_cast<int>(gen() % 19);
    shape.nominal = 1 + static_cast<int>(gen() % 2);
    shape.numeric = static_cast<int>(gen() % 3);
    shape.missing_rate = gain % 2 ? 0.15 : 0.0;
    const auto t = support::random_table(gen, shape);
    std::vector<int> rows(static_cast<std::size_t>(t.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    for (int j = 0; j < t.attributes(); ++j) {
      std::optional<double> threshold;
      if (!t.schema()[j].is_nominal()) {
        std::vector<double> vals;
        for (int i = 0; i < t.rows(); ++i)
          if (!std::isnan(t.cell(i, j))) vals.push_back(t.cell(i, j));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        if (vals.size() < 2) continue;
        const std::size_t k = gen() % (vals.size() - 1);
        threshold = (vals[k] + vals[k + 1]) / 2.0;
      }
      const auto o = support::oracle_split(t, j, threshold);
      const auto s = c45_split_score(t, rows, j, threshold ? Split::at(*threshold) : Split::multiway());
      track(s.gain, o.gain);
      track(s.split_info, o.split_info);
      ++gain;
    }
  }
  const double gain_worst = worst;
  v.require(gain_worst <= 1e-9, "gain/split info within 1e-9");

  worst = 0;
  while (nb < 1000) {
    support::TableShape shape;
    shape.rows = 3 + static_cast<int>(gen() % 18);
    shape.nominal = 1 + static_cast<int>(gen() % 4);
    shape.numeric = 0;
    shape.max_arity = 4;
    shape.missing_rate = 0.1;
    const auto t = support::random_table(gen, shape);
    const auto m = train(LearnerSpec::of(Algorithm::naive_bayes), t);
    for (int i = 0; i < t.rows(); ++i, ++nb) track(predict_distribution(m, t.row(i))(1), support::oracle_nb_posterior(t, i));
  }
  const double nb_worst = worst;
  v.require(nb_worst <= 1e-12, "NB posterior within 1e-12");

  worst = 0;
  while (merit < 1000) {
    support::TableShape shape;
    shape.rows = 5 + static_cast<int>(gen() % 40);
    shape.nominal = 1 + static_cast<int>(gen() % 6);
    shape.numeric = 0;
    shape.max_arity = 4;
    const auto t = support::random_table(gen, shape);
    const auto cache = build_cfs_cache(t);
    std::vector<int> subset;
    for (int j = 0; j < t.attributes(); ++j)
      if (gen() % 2) subset.push_back(j);
    if (subset.empty()) subset.push_back(0);
    track(cfs_merit(cache, FeatureMask(subset, t.attributes())), support::oracle_merit(t, subset));
    ++merit;
  }
  const double merit_worst = worst;
  v.require(merit_worst <= 1e-9, "CFS merit within 1e-9");

  worst = 0;
  for (; fusion < 1000; ++fusion) {
    const int n = 1 + static_cast<int>(gen() % 30);
    std::vector<Distribution> members;
    double pos_votes = 0, mean_pos = 0;
    for (int i = 0; i < n; ++i) {
      const double p = std::uniform_real_distribution<double>(0, 1)(gen);
      members.emplace_back(1.0 - p, p);
      pos_votes += p > 1.0 - p;
      mean_pos += p / n;
    }
    track(fuse_distributions(members, Fusion::majority_vote)(1), pos_votes / n);
    track(fuse_distributions(members, Fusion::average_probability)(1), mean_pos);
  }
  const double fusion_worst = worst;
  v.require(fusion_worst <= 1e-12, "fusion within 1e-12");

  worst = 0;
  for (; metric < 1000; ++metric) {
    const int n = 2 + static_cast<int>(gen() % 40);
    Eigen::VectorXd s(n);
    Eigen::VectorXi y(n), p(n);
    for (int i = 0; i < n; ++i) {
      s(i) = static_cast<double>(gen() % 6) / 5.0;
      y(i) = static_cast<int>(gen() % 2);
      p(i) = static_cast<int>(gen() % 2);
    }
    y(0) = 0;
    y(1) = 1;
    double same = 0, tp = 0, tn = 0, pos = 0;
    for (int i = 0; i < n; ++i) {
      same += y(i) == p(i);
      pos += y(i);
      tp += y(i) && p(i);
      tn += !y(i) && !p(i);
    }
    const auto c = confusion(y, p);
    track(accuracy(y, p), 100.0 * same / n);
    track(*sensitivity(c), tp / pos);
    track(*specificity(c), tn / (n - pos));
    track(*roc_auc(s, y), support::pair_auc(s, y));
    CorrectnessMatrix k(n, 2 + static_cast<int>(gen() % 10));
    for (Eigen::Index i = 0; i < k.size(); ++i) k(i) = gen() % 3 != 0;
    track(kw_variance(k), support::pair_kw(k));
  }
  const double metric_worst = worst;
  v.require(metric_worst <= 1e-12, "metrics within 1e-12");

  std::ostringstream d;
  d << gain << " splits, " << nb << " posteriors, " << merit << " merits, " << fusion << " fusions, " << metric
    << " metric sets; max |diff| " << std::scientific << std::setprecision(1)
    << std::max({gain_worst, nb_worst, merit_worst, fusion_worst, metric_worst});
  v.detail = v.detail.empty() ? d.str() : d.str() + "; " + v.detail;
  return v;
}

// ---- criterion 8 --------------------------------------------------------

Verdict auc_invariances() {
  Verdict v;
  std::mt19937_64 gen(800);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 40);
    Eigen::VectorXd s(n);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
      s(i) = u(gen);
      y(i) = static_cast<int>(gen() % 2);
    }
    y(0) = 0;
    y(1) = 1;
    const double auc = *roc_auc(s, y);
    const Eigen::VectorXd warped = (4.0 * s.array()).exp() * 3.0 - 2.0;
    worst = std::max(worst, std::abs(*roc_auc(warped, y) - auc));
    const Eigen::VectorXd reversed = 1.0 - s.array();
    const Eigen::VectorXi flipped = 1 - y.array();
    worst = std::max(worst, std::abs(auc + *roc_auc(reversed, y) - 1.0));
    worst = std::max(worst, std::abs(auc + *roc_auc(s, flipped) - 1.0));
  }
  v.require(worst <= 1e-12, "invariance within 1e-12");
  v.detail = "1000 score sets, max |diff| " + num(worst, 15) + (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- criterion 9 --------------------------------------------------------

Verdict kw_properties() {
  Verdict v;
  CorrectnessMatrix agree(5, 4);
  for (Eigen::Index i = 0; i < 5; ++i) agree.row(i).setConstant(i % 2 == 0);
  v.require(kw_variance(agree) == 0.0, "full agreement gives 0");
  CorrectnessMatrix one(4, 2);
  one.setConstant(true);
  one(1, 1) = false;
  v.require(std::abs(kw_variance(one) - 0.0625) <= 1e-15, "L=2 N=4 single disagreement gives 0.0625");
  std::mt19937_64 gen(900);
  double top = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    CorrectnessMatrix c(1 + static_cast<int>(gen() % 30), 2 + static_cast<int>(gen() % 30));
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = gen() % 2;
    top = std::max(top, kw_variance(c));
  }
  v.require(top <= 0.25, "bounded by 1/4");
  v.detail = "0, " + num(kw_variance(one), 4) + ", max over 1000 random " + num(top, 4) +
             (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- criterion 10 -------------------------------------------------------

Verdict cascade_properties() {
  Verdict v;
  std::mt19937_64 gen(1000);
  int tables = 0;
  for (; tables < 200; ++tables) {
    support::TableShape shape;
    shape.rows = 10 + static_cast<int>(gen() % 50);
    shape.nominal = static_cast<int>(gen() % 4);
    shape.numeric = 1 + static_cast<int>(gen() % 4);
    const auto t = support::random_table(gen, shape);
    const auto plan = stratified_folds(t, 3, static_cast<Seed>(tables));
    const auto train_rows = plan.train_rows(0);
    const auto test_rows = plan.test_rows(0);

    const auto model = train_cascade(LearnerSpec::of(Algorithm::naive_bayes),
                                     LearnerSpec::of(tables % 2 ? Algorithm::c45 : Algorithm::ripper),
                                     t.subset(train_rows), static_cast<Seed>(tables));
    const auto ext = phi_extend(t, model.base.model, model.base_mask());
    if (ext.attributes() != t.attributes() + 1 || model.meta.schema().size() != t.schema().size() + 1) {
      v.require(false, "arity |schema|+1");
      break;
    }
    // The same training rows inside a table whose held-out rows are scrambled.
    CellMatrix cells = t.cells();
    Eigen::VectorXi labels = t.labels();
    for (int r : test_rows) {
      for (int j = 0; j < t.attributes(); ++j)
        cells(r, j) = t.schema()[j].is_nominal() ? static_cast<double>(gen() % 2) : static_cast<double>(gen() % 50);
      labels(r) = 1 - labels(r);
    }
    const DataTable other(t.schema_ptr(), t.class_labels(), cells, labels);
    const auto twin = train_cascade(LearnerSpec::of(Algorithm::naive_bayes),
                                    LearnerSpec::of(tables % 2 ? Algorithm::c45 : Algorithm::ripper),
                                    other.subset(train_rows), static_cast<Seed>(tables));
    bool same = true;
    for (int r : test_rows) same &= predict_cascade(model, t.row(r))(1) == predict_cascade(twin, t.row(r))(1);
    if (!same) {
      v.require(false, "test-row predictions independent of held-out rows");
      break;
    }
  }
  v.detail = std::to_string(tables) + " random tables" + (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- criterion 11 -------------------------------------------------------

std::string body_of(const fs::path& report) {
  std::ifstream in(report);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("- generated:", 0) != 0) out += line + '\n';
  return out;
}

Verdict cross_process_determinism() {
  Verdict v;
  const fs::path dir = fs::temp_directory_path() / ("cascademl_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto config = dir / "determinism.config";
  {
    // The packaged protocol with fewer runs so two extra processes stay cheap.
    ExperimentConfig c = load_experiment_config(support::source_dir() / "configs" / "paper.config");
    c.runs = 2;
    std::ofstream(config) << canonical_config(c);
  }
  std::string bodies[2];
  for (int k = 0; k < 2; ++k) {
    const auto out = dir / ("report" + std::to_string(k) + ".md");
    const std::string cmd = std::string("'") + CASCADEML_CLI + "' run --config '" + config.string() + "' --out '" +
                            out.string() + "' --format markdown --jobs " + std::to_string(k + 1);
    const int status = std::system(cmd.c_str());
    v.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "process " + std::to_string(k) + " exit 0");
    bodies[k] = body_of(out);
  }
  fs::remove_all(dir);
  v.require(!bodies[0].empty(), "non-empty report");
  v.require(bodies[0] == bodies[1], "byte-identical bodies");
  v.detail = "2 processes (jobs 1 and 2), 13 methods x 2 runs x 10 folds, " + std::to_string(bodies[0].size()) +
             " bytes" + (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- criterion 12 -------------------------------------------------------

Verdict ensemble_properties() {
  Verdict v;
  const auto& t = support::cleveland().table;
  std::mt19937_64 gen(1200);
  const std::vector<std::pair<std::string, MemberSpec>> kinds{
      {"plain", PlainSpec{LearnerSpec::of(Algorithm::c45), std::nullopt}}, {"cascade", CascadeSpec{}}};
  int checks = 0;
  for (const auto& [name, spec] : kinds) {
    const Seed seed = 31;
    const Seed member_seed = derive_seed(seed, {0});
    const auto bag = train_bagging(spec, t, 1, seed);
    const auto bag_member =
        train_member(spec, bootstrap_sample(t, derive_seed(member_seed, {0})), derive_seed(member_seed, {2}));
    const auto rs = train_random_subspace(spec, t, 1, 1.0, seed);
    const auto rs_member = train_member(spec, t, derive_seed(member_seed, {2}));
    bool identical = true;
    for (int i = 0; i < t.rows(); ++i) {
      for (const auto& [e, m] : {std::pair{&bag, &bag_member}, std::pair{&rs, &rs_member}}) {
        const auto direct = predict_member(*m, t.row(i));
        const auto avg = fuse(*e, t.row(i), Fusion::average_probability);
        identical &= (avg == direct).all();
        identical &= predicted_label(fuse(*e, t.row(i), Fusion::majority_vote)) == predicted_label(direct);
        ++checks;
      }
    }
    v.require(identical, name + " singleton identity");

    const auto ens = train_random_subspace(spec, t, 15, 0.5, 32);
    bool masked = true;
    for (int i = 0; i < t.rows(); i += 3) {
      const auto before = member_distributions(ens, t.row(i));
      for (std::size_t k = 0; k < ens.members.size(); ++k) {
        std::vector<double> x(t.row(i).begin(), t.row(i).end());
        for (int j = 0; j < t.attributes(); ++j) {
          if (ens.members[k].mask.contains(j)) continue;
          const auto& a = t.schema()[j];
          x[static_cast<std::size_t>(j)] =
              a.is_nominal() ? static_cast<double>(gen() % static_cast<std::uint64_t>(a.arity())) : -500.0 + gen() % 1000;
        }
        masked &= (member_distributions(ens, x)[k] == before[k]).all();
        ++checks;
      }
    }
    v.require(masked, name + " masking correctness");
  }
  v.detail = std::to_string(checks) + " checks over bagging and random subspace, plain and cascade members" +
             (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  int jobs = 1;
  std::string report_path;
  app.add_option("--jobs", jobs, "Worker threads for the full run")->check(CLI::PositiveNumber);
  app.add_option("--report", report_path, "Also write the full-run markdown report here");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto started = std::chrono::steady_clock::now();
    const ExperimentConfig config = load_experiment_config(support::source_dir() / "configs" / "paper.config");
    const LoadResult data = load_dataset(config);
    RunOptions options;
    options.jobs = jobs;
    const EvaluationReport r = run_experiment(config, data, options);
    const double minutes =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() / 60.0;
    std::cout << "full protocol: " << config.methods.size() << " methods, " << config.runs << " x " << config.folds
              << "-fold CV, " << config.members << " members, " << num(minutes, 1) << " min\n";
    if (!report_path.empty()) std::ofstream(report_path) << emit_report(r, ReportFormat::markdown);

    Verdict c1;
    within(c1, "C4.5", method(r, "C4.5").accuracy.mean, 76.16, 3.0);
    report(1, "plain C4.5 accuracy", c1);

    Verdict c2;
    within(c2, "NB", method(r, "NB").accuracy.mean, 82.92, 3.0);
    within(c2, "AUC", method(r, "NB").roc_auc.mean, 0.902, 0.03, 4);
    report(2, "Naive Bayes with CFS+GA accuracy and ROC AUC", c2);

    Verdict c3;
    within(c3, "Bg-C_C4.5", method(r, "Bg-C_C4.5").accuracy.mean, 83.58, 3.0);
    report(3, "Bagging of cascade C4.5 accuracy", c3);

    Verdict c4;
    for (const std::string base : {"C4.5", "RPR"}) {
      greater(c4, r, "C_" + base, base);
      greater(c4, r, "Bg-C_" + base, "Bg-" + base);
      greater(c4, r, "Rs-C_" + base, "Rs-" + base);
    }
    report(4, "cascade beats its plain counterpart, six orderings", c4);

    Verdict c5;
    const auto& bg = method(r, "Bg-C4.5");
    const auto& rs = method(r, "Rs-C4.5");
    const auto& bgc = method(r, "Bg-C_C4.5");
    const auto& rsc = method(r, "Rs-C_C4.5");
    c5.require(bgc.kw_variance->mean < bg.kw_variance->mean, "KW Bg-C_C4.5 < Bg-C4.5");
    c5.require(rsc.kw_variance->mean < rs.kw_variance->mean, "KW Rs-C_C4.5 < Rs-C4.5");
    c5.require(bgc.member_accuracy->mean > bg.member_accuracy->mean, "member acc Bg-C_C4.5 > Bg-C4.5");
    c5.require(rsc.member_accuracy->mean > rs.member_accuracy->mean, "member acc Rs-C_C4.5 > Rs-C4.5");
    const struct {
      const MethodReport* m;
      double kw, acc;
    } table3[] = {{&bg, 0.1166, 74.5404}, {&rs, 0.1135, 75.4762}, {&bgc, 0.0922, 78.2409}, {&rsc, 0.1019, 77.4704}};
    for (const auto& row : table3) {
      within(c5, row.m->method.display_name() + " KW", row.m->kw_variance->mean, row.kw, 0.04, 4);
      within(c5, "member acc", row.m->member_accuracy->mean, row.acc, 3.0);
    }
    report(5, "diversity falls and member accuracy rises under cascading", c5);

    Verdict c6;
    c6.require(data.table.rows() == 303, "303 rows");
    c6.require(data.table.attributes() == 13, "13 attributes");
    c6.require(data.table.class_counts()(kNegative) == 164 && data.table.class_counts()(kPositive) == 139,
               "164/139 split");
    c6.detail = std::to_string(data.table.rows()) + " rows, " + std::to_string(data.table.attributes()) +
                " attributes, " + std::to_string(data.table.class_counts()(kNegative)) + "/" +
                std::to_string(data.table.class_counts()(kPositive)) + (c6.detail.empty() ? "" : "; " + c6.detail);
    report(6, "dataset facts", c6);

    report(7, "gain ratio, NB posterior, CFS merit, fusion and metrics match brute-force oracles", oracle_agreement());
    report(8, "ROC AUC monotone invariance and complement identities", auc_invariances());
    report(9, "KW variance examples and 1/4 bound", kw_properties());
    report(10, "phi_extend arity and leakage on random tables", cascade_properties());
    report(11, "two processes give byte-identical report bodies", cross_process_determinism());
    report(12, "singleton identity and subspace masking for both constructors and member kinds", ensemble_properties());
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all 12 criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
