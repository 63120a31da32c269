// Command-line front end: train / finetune / landscape / experiment / hermite /
// check subcommands over the sindex library.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sindex/checks.hpp"
#include "sindex/harness.hpp"
#include "sindex/landscape.hpp"
#include "sindex/model.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sindex::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return sindex::checks::default_experiment_config();
  return sindex::experiment_config_from_json(slurp(path));
}

struct CommonOpts {
  std::string config;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out = "out";
  std::string format = "csv";
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config, "JSON config path");
  cmd->add_option("--seed", opts.seed, "seed override")->each([&](const std::string&) {
    opts.seed_set = true;
  });
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--format", opts.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--quiet", opts.quiet, "suppress progress lines");
}

int cmd_hermite(bool relu, int max_order, const std::string& format) {
  if (!relu) {
    std::fprintf(stderr, "hermite: only --relu coefficients are available\n");
    return 1;
  }
  const sindex::HermiteSeries s = sindex::relu_coeffs_closed_form(max_order);
  if (format == "json") {
    std::printf("%s\n", sindex::to_json(s).c_str());
  } else {
    std::printf("j,alpha\n");
    for (int j = 0; j <= max_order; ++j) std::printf("%d,%.17g\n", j, s.coeffs[j]);
  }
  return 0;
}

int cmd_train(const CommonOpts& opts) {
  sindex::ExperimentConfig config = load_config(opts.config);
  const std::uint64_t seed = opts.seed_set ? opts.seed : config.base_seed;
  const int d = config.d_values.front();
  const int s = config.s_values.front();
  const int n = config.n_values.front();
  const int nf = config.feature_counts.front();
  const sindex::TeacherSpec teacher =
      sindex::make_teacher(sindex::LinkSpec::stripped(config.base_link, s), d, seed,
                           config.sigma, 64, false, opts.quiet);
  const sindex::FeatureBank bank = sindex::sample_bank(nf, config.tau, seed);
  const sindex::Dataset data = sindex::sample_dataset(teacher, n, d, seed, "train");
  sindex::TrainConfig tc = config.train;
  tc.lambda = config.lambdas.front();
  tc.s_hint = teacher.info_exponent;
  tc.seed = seed;
  const sindex::ModelState state0 = sindex::init_state(tc, bank, d, seed);
  const sindex::TrainTrace trace = sindex::run_two_phase(state0, tc, bank, data, &teacher);
  std::filesystem::create_directories(opts.out);
  sindex::write_trace_csv(trace, opts.out + "/trace.csv");
  std::ofstream(opts.out + "/state.json") << sindex::to_json(trace.final_state);
  sindex::emit_trace_plot(trace, opts.out);
  const double m = trace.final_state.theta.dot(teacher.theta_star);
  if (!opts.quiet) {
    std::printf("final |m| = %.6f, loss = %.6g, status = %s\n", std::abs(m),
                trace.records.back().loss,
                trace.status == sindex::TrainStatus::ok ? "ok" : "diverged");
  }
  return trace.status == sindex::TrainStatus::ok ? 0 : 2;
}

int cmd_finetune(const CommonOpts& opts, const std::string& state_path) {
  sindex::ExperimentConfig config = load_config(opts.config);
  const std::uint64_t seed = opts.seed_set ? opts.seed : config.base_seed;
  const int d = config.d_values.front();
  const int s = config.s_values.front();
  const int n = config.n_values.front();
  const int nf = config.feature_counts.front();
  const sindex::TeacherSpec teacher =
      sindex::make_teacher(sindex::LinkSpec::stripped(config.base_link, s), d, seed,
                           config.sigma, 64, false, opts.quiet);
  const sindex::FeatureBank bank = sindex::sample_bank(nf, config.tau, seed);
  sindex::ModelState state;
  if (!state_path.empty()) {
    state = sindex::model_state_from_json(slurp(state_path));
  } else {
    throw std::runtime_error("finetune requires --state with a trained model");
  }
  const sindex::Dataset fresh = sindex::sample_dataset(teacher, n, d, seed, "finetune");
  double lft = config.lambda_fts.front();
  if (lft <= 0.0) {
    lft = sindex::fine_tune_lambda_default(teacher, config.tau, n, config.sigma);
  }
  state.c = sindex::fine_tune_ridge(state.theta, bank, fresh, lft);
  std::filesystem::create_directories(opts.out);
  std::ofstream(opts.out + "/state_finetuned.json") << sindex::to_json(state);
  const sindex::RiskEstimate risk =
      sindex::excess_risk(state, bank, teacher, config.n_test, seed);
  if (!opts.quiet) {
    std::printf("fine-tuned excess risk = %.6g (se %.2g), lambda' = %.4g\n", risk.value,
                risk.std_error, lft);
  }
  return 0;
}

int cmd_landscape(const CommonOpts& opts, int m_grid, const std::string& cache_dir) {
  sindex::ExperimentConfig config = load_config(opts.config);
  const std::uint64_t seed = opts.seed_set ? opts.seed : config.base_seed;
  const int s = config.s_values.front();
  const int nf = config.feature_counts.front();
  const double lambda = config.lambdas.front();
  const int J = 64;
  const sindex::TeacherSpec teacher =
      sindex::make_teacher(sindex::LinkSpec::stripped(config.base_link, s), 10, seed,
                           config.sigma, J, false, opts.quiet);
  const sindex::FeatureBank bank = sindex::sample_bank(nf, config.tau, seed);
  const sindex::QuadratureRule quad = sindex::QuadratureRule::gauss_hermite(256);

  sindex::FeatureOperator op;
  bool loaded = false;
  std::string cache_path;
  if (!cache_dir.empty()) {
    std::filesystem::create_directories(cache_dir);
    char name[64];
    std::snprintf(name, sizeof(name), "/op_%016llx.bin",
                  static_cast<unsigned long long>(
                      sindex::operator_cache_key(bank, J, lambda, quad)));
    cache_path = cache_dir + name;
    loaded = sindex::load_operator(cache_path, lambda, op);
  }
  if (!loaded) {
    op = sindex::build_operator(bank, J, lambda, quad);
    if (!cache_path.empty()) sindex::save_operator(cache_path, op);
  }
  const sindex::PopulationOracle oracle =
      sindex::make_oracle(teacher.series, std::move(op), config.sigma * config.sigma);
  const auto rows = sindex::landscape_scan(oracle, m_grid);
  std::filesystem::create_directories(opts.out);
  sindex::write_scan_csv(rows, opts.out + "/landscape.csv");
  sindex::emit_landscape_plot(rows, opts.out);
  if (!opts.quiet) {
    std::printf("landscape scan: %d rows -> %s/landscape.csv\n", m_grid, opts.out.c_str());
  }
  return 0;
}

int cmd_experiment(const CommonOpts& opts, bool write_default) {
  if (write_default) {
    std::printf("%s\n", sindex::to_json(sindex::checks::default_experiment_config()).c_str());
    return 0;
  }
  sindex::ExperimentConfig config = load_config(opts.config);
  if (opts.seed_set) config.base_seed = opts.seed;
  config.quiet = config.quiet || opts.quiet;
  config.out_dir = opts.out;
  std::filesystem::create_directories(config.out_dir);
  const sindex::ResultTable table =
      sindex::run_experiment(config, config.out_dir + "/timings.log");
  sindex::write_result_table(table, config.out_dir + "/results.csv");
  if (opts.format == "json") {
    sindex::write_result_table_json(table, config.out_dir + "/results.json");
  }
  sindex::emit_plots(table, sindex::PlotKind::risk_vs_n, config.out_dir);
  sindex::emit_plots(table, sindex::PlotKind::m_vs_n, config.out_dir);
  int errors = 0;
  for (const auto& r : table.rows) {
    if (r.kind == "error") ++errors;
  }
  if (!opts.quiet) {
    std::printf("experiment: %zu rows (%d failed cells) -> %s/results.csv\n",
                table.rows.size(), errors, config.out_dir.c_str());
  }
  return 0;
}

int cmd_check(const std::string& suite, int criterion) {
  std::vector<sindex::checks::CheckResult> results;
  if (suite == "invariants") {
    results = sindex::checks::run_invariants();
  } else if (suite == "acceptance") {
    if (criterion > 0) {
      results.push_back(sindex::checks::run_criterion(criterion));
    } else {
      results = sindex::checks::run_all_criteria();
    }
  } else {
    std::fprintf(stderr, "unknown suite: %s\n", suite.c_str());
    return 1;
  }
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%s] %d %s: %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str());
    all_pass &= r.pass;
  }
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-index model learning with frozen random biases"};
  app.require_subcommand(1);

  CommonOpts train_opts, finetune_opts, landscape_opts, experiment_opts;

  auto* train = app.add_subcommand("train", "two-phase gradient descent on one cell");
  add_common(train, train_opts);

  auto* finetune = app.add_subcommand("finetune", "ridge refit of the second layer");
  add_common(finetune, finetune_opts);
  std::string state_path;
  finetune->add_option("--state", state_path, "trained model state JSON");

  auto* landscape = app.add_subcommand("landscape", "population landscape scan");
  add_common(landscape, landscape_opts);
  int m_grid = 201;
  std::string cache_dir;
  landscape->add_option("--m-grid", m_grid, "grid points in [-1, 1]");
  landscape->add_option("--cache-dir", cache_dir, "feature-operator cache directory");

  auto* experiment = app.add_subcommand("experiment", "config-driven sweep");
  add_common(experiment, experiment_opts);
  bool write_default = false;
  experiment->add_flag("--write-default-config", write_default,
                       "print the built-in default config and exit");

  auto* hermite = app.add_subcommand("hermite", "link-function Hermite coefficients");
  bool relu = false;
  int max_order = 8;
  std::string hermite_format = "csv";
  hermite->add_flag("--relu", relu, "closed-form ReLU coefficients");
  hermite->add_option("--max-order", max_order, "highest coefficient index");
  hermite->add_option("--format", hermite_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* check = app.add_subcommand("check", "run verification suites");
  std::string suite = "acceptance";
  int criterion = 0;
  check->add_option("--suite", suite, "invariants | acceptance");
  check->add_option("--criterion", criterion, "run a single acceptance criterion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // usage errors -> exit 1, --help -> 0
  }

  try {
    if (train->parsed()) return cmd_train(train_opts);
    if (finetune->parsed()) return cmd_finetune(finetune_opts, state_path);
    if (landscape->parsed()) return cmd_landscape(landscape_opts, m_grid, cache_dir);
    if (experiment->parsed()) return cmd_experiment(experiment_opts, write_default);
    if (hermite->parsed()) return cmd_hermite(relu, max_order, hermite_format);
    if (check->parsed()) return cmd_check(suite, criterion);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 2;
  }
  return 1;
}
