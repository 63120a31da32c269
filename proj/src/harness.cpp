#include "sindex/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <tuple>

#include "sindex/landscape.hpp"
#include "sindex/parallel.hpp"
#include "sindex/svg.hpp"

namespace sindex {

namespace {

LinkSpec link_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", std::string("piecewise_linear"));
  if (kind == "piecewise_linear") {
    LinkSpec s = LinkSpec::default_teacher();
    if (j.contains("knots")) s.knots = j.at("knots").get<std::vector<double>>();
    if (j.contains("values")) s.values = j.at("values").get<std::vector<double>>();
    return s;
  }
  if (kind == "hermite_monomial") return LinkSpec::monomial(j.at("order").get<int>());
  if (kind == "relu") return LinkSpec::relu_link();
  if (kind == "custom_series") {
    LinkSpec s;
    s.kind = LinkKind::custom_series;
    const auto v = j.at("coeffs").get<std::vector<double>>();
    s.custom = HermiteSeries(
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size())));
    return s;
  }
  throw std::invalid_argument("unknown teacher kind: " + kind);
}

nlohmann::json link_to_json(const LinkSpec& s) {
  nlohmann::json j;
  switch (s.kind) {
    case LinkKind::piecewise_linear:
      j["kind"] = "piecewise_linear";
      j["knots"] = s.knots;
      j["values"] = s.values;
      break;
    case LinkKind::hermite_monomial:
      j["kind"] = "hermite_monomial";
      j["order"] = s.monomial_order;
      break;
    case LinkKind::relu:
      j["kind"] = "relu";
      break;
    case LinkKind::custom_series:
      j["kind"] = "custom_series";
      j["coeffs"] = std::vector<double>(s.custom.coeffs.data(),
                                        s.custom.coeffs.data() + s.custom.coeffs.size());
      break;
  }
  return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentConfig c;
  if (j.contains("teacher")) c.base_link = link_from_json(j.at("teacher"));
  if (j.contains("d")) c.d_values = j.at("d").get<std::vector<int>>();
  if (j.contains("s")) c.s_values = j.at("s").get<std::vector<int>>();
  if (j.contains("n")) c.n_values = j.at("n").get<std::vector<int>>();
  if (j.contains("N")) c.feature_counts = j.at("N").get<std::vector<int>>();
  if (j.contains("lambda")) c.lambdas = j.at("lambda").get<std::vector<double>>();
  if (j.contains("lambda_ft")) c.lambda_fts = j.at("lambda_ft").get<std::vector<double>>();
  c.sigma = j.value("sigma", c.sigma);
  c.tau = j.value("tau", c.tau);
  c.seeds = j.value("seeds", c.seeds);
  c.base_seed = j.value("base_seed", c.base_seed);
  c.n_test = j.value("n_test", c.n_test);
  c.quiet = j.value("quiet", c.quiet);
  if (j.contains("report")) {
    const std::string r = j.at("report").get<std::string>();
    if (r == "mean_std") {
      c.report = ReportMode::mean_std;
    } else if (r == "best_of") {
      c.report = ReportMode::best_of;
    } else {
      throw std::invalid_argument("unknown report mode: " + r);
    }
  }
  c.out_dir = j.value("out_dir", c.out_dir);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    c.train.step_theta = t.value("step_theta", c.train.step_theta);
    c.train.step_ratio = t.value("step_ratio", c.train.step_ratio);
    c.train.step_c = t.value("step_c", c.train.step_c);
    c.train.t0_steps = t.value("t0", c.train.t0_steps);
    c.train.t1_steps = t.value("t1", c.train.t1_steps);
    c.train.record_every = t.value("record_every", c.train.record_every);
    c.train.rho_init = t.value("rho_init", c.train.rho_init);
    c.train.n0 = t.value("n0", c.train.n0);
    c.train.backoff_tol = t.value("backoff_tol", c.train.backoff_tol);
    c.train.max_halvings = t.value("max_halvings", c.train.max_halvings);
  }
  if (c.d_values.empty() || c.s_values.empty() || c.n_values.empty() ||
      c.feature_counts.empty() || c.lambdas.empty() || c.lambda_fts.empty() ||
      c.seeds < 1) {
    throw std::invalid_argument("experiment grid must be nonempty with seeds >= 1");
  }
  return c;
}

std::string to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["teacher"] = link_to_json(c.base_link);
  j["d"] = c.d_values;
  j["s"] = c.s_values;
  j["n"] = c.n_values;
  j["N"] = c.feature_counts;
  j["lambda"] = c.lambdas;
  j["lambda_ft"] = c.lambda_fts;
  j["sigma"] = c.sigma;
  j["tau"] = c.tau;
  j["seeds"] = c.seeds;
  j["base_seed"] = c.base_seed;
  j["n_test"] = c.n_test;
  j["report"] = c.report == ReportMode::mean_std ? "mean_std" : "best_of";
  j["out_dir"] = c.out_dir;
  j["train"] = {{"step_theta", c.train.step_theta}, {"step_ratio", c.train.step_ratio},
                {"step_c", c.train.step_c},         {"t0", c.train.t0_steps},
                {"t1", c.train.t1_steps},           {"record_every", c.train.record_every},
                {"rho_init", c.train.rho_init},     {"n0", c.train.n0}};
  return j.dump(2);
}

std::string result_table_csv(const ResultTable& table) {
  std::string out =
      "kind,d,s,n,N,lambda,lambda_ft,seed,final_abs_m,excess_pre,excess_post,train_loss,"
      "m_std,excess_pre_std,excess_post_std,train_loss_std,status\n";
  char buf[640];
  for (const auto& r : table.rows) {
    std::snprintf(
        buf, sizeof(buf),
        "%s,%d,%d,%d,%d,%.17g,%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
        r.kind.c_str(), r.d, r.s, r.n, r.feature_count, r.lambda, r.lambda_ft,
        static_cast<unsigned long long>(r.seed), r.final_abs_m, r.excess_pre,
        r.excess_post, r.train_loss, r.m_std, r.excess_pre_std, r.excess_post_std,
        r.train_loss_std, r.status.c_str());
    out += buf;
  }
  return out;
}

void write_result_table(const ResultTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << result_table_csv(table);
}

namespace {

struct Cell {
  int d, s, n, feature_count;
  double lambda, lambda_ft;
};

int kind_rank(const std::string& k) {
  if (k == "raw") return 0;
  if (k == "error") return 1;
  return 2;  // mean / best
}

bool row_less(const ResultRow& a, const ResultRow& b) {
  auto key = [](const ResultRow& r) {
    return std::make_tuple(r.d, r.s, r.n, r.feature_count, r.lambda, r.lambda_ft,
                           kind_rank(r.kind), r.seed);
  };
  return key(a) < key(b);
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config, const std::string& timing_log_path) {
  std::vector<Cell> cells;
  for (int d : config.d_values)
    for (int s : config.s_values)
      for (int n : config.n_values)
        for (int nf : config.feature_counts)
          for (double lam : config.lambdas)
            for (double lft : config.lambda_fts) cells.push_back({d, s, n, nf, lam, lft});

  const int runs = static_cast<int>(cells.size()) * config.seeds;
  std::vector<ResultRow> raw(static_cast<std::size_t>(runs));
  std::vector<double> wall_ms(static_cast<std::size_t>(runs), 0.0);

#pragma omp parallel for schedule(dynamic, 1) num_threads(par::max_threads())
  for (int run = 0; run < runs; ++run) {
    const Cell& cell = cells[static_cast<std::size_t>(run) / config.seeds];
    const int seed_index = run % config.seeds;
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(seed_index);
    ResultRow row;
    row.kind = "raw";
    row.d = cell.d;
    row.s = cell.s;
    row.n = cell.n;
    row.feature_count = cell.feature_count;
    row.lambda = cell.lambda;
    row.lambda_ft = cell.lambda_ft;
    row.seed = seed;
    const auto t_start = std::chrono::steady_clock::now();
    try {
      const TeacherSpec teacher =
          make_teacher(LinkSpec::stripped(config.base_link, cell.s), cell.d, seed,
                       config.sigma, 64, false, true);
      const FeatureBank bank = sample_bank(cell.feature_count, config.tau, seed);
      const Dataset data = sample_dataset(teacher, cell.n, cell.d, seed, "train");

      TrainConfig tc = config.train;
      tc.lambda = cell.lambda;
      tc.s_hint = teacher.info_exponent;
      tc.seed = seed;

      const ModelState state0 = init_state(tc, bank, cell.d, seed);
      const TrainTrace trace = run_two_phase(state0, tc, bank, data, &teacher);
      if (trace.status == TrainStatus::diverged) {
        row.kind = "error";
        row.status = "diverged";
      } else {
        const ModelState& fin = trace.final_state;
        row.final_abs_m = std::abs(fin.theta.dot(teacher.theta_star));
        row.train_loss = trace.records.back().loss;
        row.excess_pre = excess_risk(fin, bank, teacher, config.n_test, seed).value;

        const Dataset fresh = sample_dataset(teacher, cell.n, cell.d, seed, "finetune");
        const double lft =
            cell.lambda_ft > 0.0
                ? cell.lambda_ft
                : fine_tune_lambda_default(teacher, config.tau, cell.n, config.sigma);
        ModelState tuned = fin;
        tuned.c = fine_tune_ridge(fin.theta, bank, fresh, lft);
        row.excess_post = excess_risk(tuned, bank, teacher, config.n_test, seed).value;
      }
    } catch (const std::exception& e) {
      row.kind = "error";
      row.status = std::string("error: ") + e.what();
    }
    wall_ms[static_cast<std::size_t>(run)] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  t_start)
            .count();
    raw[static_cast<std::size_t>(run)] = row;
  }

  // timings stay out of the results CSV so reruns compare byte-identical
  if (!timing_log_path.empty()) {
    std::ofstream log(timing_log_path);
    for (int run = 0; run < runs; ++run) {
      log << "run " << run << " wall_ms " << wall_ms[static_cast<std::size_t>(run)]
          << "\n";
    }
  }

  ResultTable table;
  table.rows = raw;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    std::vector<const ResultRow*> ok;
    for (int s = 0; s < config.seeds; ++s) {
      const ResultRow& r = raw[ci * static_cast<std::size_t>(config.seeds) +
                               static_cast<std::size_t>(s)];
      if (r.kind == "raw") ok.push_back(&r);
    }
    if (ok.empty()) continue;
    const Cell& cell = cells[ci];
    ResultRow agg;
    agg.d = cell.d;
    agg.s = cell.s;
    agg.n = cell.n;
    agg.feature_count = cell.feature_count;
    agg.lambda = cell.lambda;
    agg.lambda_ft = cell.lambda_ft;
    agg.seed = 0;
    if (config.report == ReportMode::mean_std) {
      agg.kind = "mean";
      auto acc = [&](auto get, double& mean_out, double& std_out) {
        double m = 0.0;
        for (const auto* r : ok) m += get(*r);
        m /= static_cast<double>(ok.size());
        double v = 0.0;
        for (const auto* r : ok) v += (get(*r) - m) * (get(*r) - m);
        v = ok.size() > 1 ? v / static_cast<double>(ok.size() - 1) : 0.0;
        mean_out = m;
        std_out = std::sqrt(v);
      };
      acc([](const ResultRow& r) { return r.final_abs_m; }, agg.final_abs_m, agg.m_std);
      acc([](const ResultRow& r) { return r.excess_pre; }, agg.excess_pre,
          agg.excess_pre_std);
      acc([](const ResultRow& r) { return r.excess_post; }, agg.excess_post,
          agg.excess_post_std);
      acc([](const ResultRow& r) { return r.train_loss; }, agg.train_loss,
          agg.train_loss_std);
    } else {
      agg.kind = "best";
      const ResultRow* best = ok.front();
      for (const auto* r : ok) {
        if (r->excess_post < best->excess_post) best = r;
      }
      agg.seed = best->seed;
      agg.final_abs_m = best->final_abs_m;
      agg.excess_pre = best->excess_pre;
      agg.excess_post = best->excess_post;
      agg.train_loss = best->train_loss;
    }
    table.rows.push_back(agg);
  }
  std::sort(table.rows.begin(), table.rows.end(), row_less);
  return table;
}

bool emit_plots(const ResultTable& table, PlotKind kind, const std::string& out_dir) {
  if (kind == PlotKind::landscape_scan || kind == PlotKind::trace) {
    throw std::invalid_argument(
        "landscape/trace plots take their own data; use the dedicated emitters");
  }
  std::map<std::pair<int, int>, PlotSeries> groups;
  bool have_band = false;
  for (const auto& r : table.rows) {
    if (r.kind != "mean" && r.kind != "best") continue;
    auto& series = groups[{r.d, r.s}];
    series.label = "d=" + std::to_string(r.d) + " s=" + std::to_string(r.s);
    const double y = kind == PlotKind::risk_vs_n ? r.excess_post : r.final_abs_m;
    const double sd = kind == PlotKind::risk_vs_n ? r.excess_post_std : r.m_std;
    series.x.push_back(r.n);
    series.y.push_back(y);
    if (r.kind == "mean") {
      series.y_lo.push_back(y - sd);
      series.y_hi.push_back(y + sd);
      have_band = true;
    }
  }
  if (groups.empty()) {
    std::fprintf(stderr, "nothing to plot\n");
    return false;
  }

  PlotSpec spec;
  spec.log_x = true;
  if (kind == PlotKind::risk_vs_n) {
    spec.title = "excess risk vs sample size";
    spec.x_label = "n";
    spec.y_label = "excess risk (fine-tuned)";
    spec.log_y = true;
  } else {
    spec.title = "recovered correlation vs sample size";
    spec.x_label = "n";
    spec.y_label = "|m|";
  }
  for (auto& [key, series] : groups) {
    if (spec.log_y && have_band) {
      for (std::size_t i = 0; i < series.y_lo.size(); ++i) {
        series.y_lo[i] = std::max(series.y_lo[i], 1e-6 * std::max(series.y[i], 1e-300));
      }
    }
    spec.series.push_back(series);
  }
  std::filesystem::create_directories(out_dir);
  const std::string path =
      out_dir + "/" + (kind == PlotKind::risk_vs_n ? "risk_vs_n.svg" : "m_vs_n.svg");
  std::ofstream out(path);
  out << render_svg(spec);
  return true;
}

bool emit_landscape_plot(const std::vector<LandscapeScanRow>& rows,
                         const std::string& out_dir) {
  if (rows.empty()) {
    std::fprintf(stderr, "nothing to plot\n");
    return false;
  }
  PlotSpec spec;
  spec.title = "projected population loss";
  spec.x_label = "m";
  spec.y_label = "value";
  PlotSeries loss, residual;
  loss.label = "projected loss";
  residual.label = "critical residual";
  for (const auto& r : rows) {
    loss.x.push_back(r.m);
    loss.y.push_back(r.loss);
    residual.x.push_back(r.m);
    residual.y.push_back(r.residual);
  }
  spec.series = {loss, residual};
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir + "/landscape_scan.svg");
  out << render_svg(spec);
  return true;
}

bool emit_trace_plot(const TrainTrace& trace, const std::string& out_dir) {
  if (trace.records.empty()) {
    std::fprintf(stderr, "nothing to plot\n");
    return false;
  }
  PlotSpec spec;
  spec.title = "training trace";
  spec.x_label = "step";
  spec.y_label = "value";
  PlotSeries m, loss;
  m.label = "|m|";
  loss.label = "loss";
  for (const auto& r : trace.records) {
    if (std::isfinite(r.m)) {
      m.x.push_back(r.step);
      m.y.push_back(std::abs(r.m));
    }
    loss.x.push_back(r.step);
    loss.y.push_back(r.loss);
  }
  if (!m.x.empty()) spec.series.push_back(m);
  spec.series.push_back(loss);
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir + "/trace.svg");
  out << render_svg(spec);
  return true;
}

}  // namespace sindex
