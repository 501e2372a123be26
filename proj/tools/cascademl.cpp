// Command-line front end: run, reproduce-paper, train, inspect-model.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "cascademl/cascade.hpp"
#include "cascademl/config.hpp"
#include "cascademl/ensemble.hpp"
#include "cascademl/harness.hpp"

namespace {

using namespace cascademl;

enum Exit { kOk = 0, kConfigError = 1, kDataError = 2, kRuntimeError = 3 };

struct ReportOptions {
  std::string out;
  std::string format = "markdown";
  std::string mask_log;
  int jobs = 1;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

int run_and_report(const ExperimentConfig& config, const ReportOptions& opts) {
  ReportFormat format;
  try {
    format = parse_report_format(opts.format);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
  const LoadResult data = load_dataset(config);
  RunOptions run;
  run.jobs = opts.jobs;
  const EvaluationReport report = run_experiment(config, data, run);
  write_text(opts.out, emit_report(report, format));
  if (!opts.mask_log.empty()) {
    std::ostringstream log;
    write_mask_log(log, report);
    write_text(opts.mask_log, log.str());
  }
  return kOk;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int inspect(const std::string& path) {
  const std::string text = slurp(path);
  std::istringstream in(text);
  std::string magic;
  in >> magic;
  in.seekg(0);
  if (magic == "cascademl-model") std::cout << describe(read_model(in));
  else if (magic == "cascademl-selected") {
    const SelectedModel m = read_selected(in);
    std::cout << "selected attributes " << m.mask.to_string() << " of " << m.mask.attribute_count() << '\n'
              << describe(m.model);
  } else if (magic == "cascademl-cascade") std::cout << describe(read_cascade(in));
  else if (magic == "cascademl-ensemble") std::cout << describe(read_ensemble(in));
  else throw FormatError("'" + path + "' is not a cascademl model file");
  std::cout << '\n';
  return kOk;
}

int train_model(const std::string& config_path, const std::string& method_token, const std::string& out,
                std::optional<Seed> seed) {
  ExperimentConfig config = load_experiment_config(config_path);
  if (seed) config.seed = *seed;
  const MethodConfig method = parse_method(method_token);
  const LoadResult data = load_dataset(config);
  const MemberSpec spec = config.member_spec(method);
  std::ostringstream text;
  if (method.wrapper == Wrapper::bagging) {
    write_ensemble(text, train_bagging(spec, data.table, config.members, config.seed, config.label_fusion));
  } else if (method.wrapper == Wrapper::random_subspace) {
    write_ensemble(text, train_random_subspace(spec, data.table, config.members, config.subspace_fraction,
                                               config.seed, config.label_fusion));
  } else {
    const MemberModel model = train_member(spec, data.table, config.seed);
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, TrainedModel>) write_model(text, m);
          else if constexpr (std::is_same_v<T, SelectedModel>) write_selected(text, m);
          else write_cascade(text, m);
        },
        model);
  }
  write_text(out, text.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascade generalization inside Bagging and Random Subspace ensembles"};
  app.require_subcommand(1);

  ReportOptions run_opts;
  std::string config_path;
  std::optional<long long> seed_override;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", run_opts.out, "Report path (default: stdout)");
  run->add_option("--format", run_opts.format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  run->add_option("--seed", seed_override, "Override the master seed")->check(CLI::NonNegativeNumber);
  run->add_option("--jobs", run_opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--mask-log", run_opts.mask_log, "Write every subspace and selected mask to this file");

  ReportOptions repro_opts;
  std::string data_path;
  auto* repro = app.add_subcommand("reproduce-paper", "Run the packaged 13-method Cleveland protocol");
  repro->add_option("--data", data_path, "processed.cleveland.data")->required();
  repro->add_option("--out", repro_opts.out, "Report path (default: stdout)");
  repro->add_option("--format", repro_opts.format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  repro->add_option("--jobs", repro_opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  repro->add_option("--mask-log", repro_opts.mask_log, "Write every subspace and selected mask to this file");

  std::string model_path;
  auto* inspect_cmd = app.add_subcommand("inspect-model", "Pretty-print a serialized model");
  inspect_cmd->add_option("path", model_path, "Model file")->required();

  std::string train_config, train_method, train_out;
  std::optional<long long> train_seed;
  auto* train_cmd = app.add_subcommand("train", "Train one method on the whole configured dataset and save it");
  train_cmd->add_option("--config", train_config, "Config file")->required();
  train_cmd->add_option("--method", train_method, "Method token, e.g. bagging:cascade_c45")->required();
  train_cmd->add_option("--out", train_out, "Model path (default: stdout)");
  train_cmd->add_option("--seed", train_seed, "Override the master seed")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) {
      ExperimentConfig config = load_experiment_config(config_path);
      if (seed_override) config.seed = static_cast<Seed>(*seed_override);
      return run_and_report(config, run_opts);
    }
    if (*repro) return run_and_report(paper_config(data_path), repro_opts);
    if (*inspect_cmd) return inspect(model_path);
    if (*train_cmd) {
      std::optional<Seed> seed;
      if (train_seed) seed = static_cast<Seed>(*train_seed);
      return train_model(train_config, train_method, train_out, seed);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IngestionError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
