#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sindex/datagen.hpp"
#include "sindex/train.hpp"

namespace sindex {

enum class ReportMode { mean_std, best_of };

// One sweep: the cartesian grid over (d, s, n, N, lambda, lambda') times the
// seed list, every cell fully determined by (config, cell index, seed).
struct ExperimentConfig {
  LinkSpec base_link = LinkSpec::default_teacher();
  std::vector<int> d_values{10};
  std::vector<int> s_values{1};
  std::vector<int> n_values{1024};
  std::vector<int> feature_counts{100};
  std::vector<double> lambdas{1e-3};
  std::vector<double> lambda_fts{0.0};  // 0 -> theory default per n'
  double sigma = 1e-3;
  double tau = 2.0;
  int seeds = 10;
  std::uint64_t base_seed = 1;
  TrainConfig train;
  int n_test = 10000;
  ReportMode report = ReportMode::mean_std;
  std::string out_dir = "out";
  bool quiet = false;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string to_json(const ExperimentConfig& config);

struct ResultRow {
  std::string kind;  // raw | mean | best | error
  int d = 0, s = 0, n = 0, feature_count = 0;
  double lambda = 0.0, lambda_ft = 0.0;
  std::uint64_t seed = 0;
  double final_abs_m = 0.0;
  double excess_pre = 0.0;
  double excess_post = 0.0;
  double train_loss = 0.0;
  double m_std = 0.0;  // seed spread, filled on mean rows
  double excess_pre_std = 0.0;
  double excess_post_std = 0.0;
  double train_loss_std = 0.0;
  std::string status = "ok";
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

std::string result_table_csv(const ResultTable& table);
void write_result_table(const ResultTable& table, const std::string& path);

// Runs the sweep.  Individual cell failures become `error` rows; the sweep
// itself never aborts.  Wall-clock timings go to a side log (kept out of the
// CSV so reruns stay byte-identical).
ResultTable run_experiment(const ExperimentConfig& config,
                           const std::string& timing_log_path = "");

enum class PlotKind { risk_vs_n, m_vs_n, landscape_scan, trace };

// Writes <kind>.svg under out_dir; returns false (and emits a note) when the
// table has nothing usable for that kind.
bool emit_plots(const ResultTable& table, PlotKind kind, const std::string& out_dir);
bool emit_landscape_plot(const std::vector<struct LandscapeScanRow>& rows,
                         const std::string& out_dir);
bool emit_trace_plot(const TrainTrace& trace, const std::string& out_dir);

}  // namespace sindex
