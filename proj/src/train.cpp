#include "sindex/train.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "sindex/parallel.hpp"
#include "sindex/rng.hpp"

namespace sindex {

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "step,m,loss,grad_c_norm,grad_theta_norm,c_norm\n");
  for (const auto& r : trace.records) {
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.m, r.loss,
                 r.grad_c_norm, r.grad_theta_norm, r.c_norm);
  }
  std::fclose(f);
}

ModelState init_state(const TrainConfig& config, const FeatureBank& bank, int d,
                      std::uint64_t seed) {
  const int N = bank.size();
  const int n0 = config.n0 > 0 ? config.n0 : std::max(3, static_cast<int>(std::ceil(std::log(10.0))));
  if (n0 < 1 || n0 > N) throw std::invalid_argument("initial support size must be in [1, N]");
  double rho = config.rho_init;
  if (rho <= 0.0) {
    const double s = static_cast<double>(config.s_hint);
    rho = std::sqrt(static_cast<double>(N)) * std::pow(static_cast<double>(n0), -(2.0 + s) / 2.0) /
          (bank.tau * bank.tau + config.lambda * N / n0);
  }

  ModelState state;
  Rng theta_rng = Rng::stream(seed, "init_theta");
  state.theta = theta_rng.sphere(d);

  Rng c_rng = Rng::stream(seed, "init_c");
  // uniform n0-subset via partial Fisher-Yates
  std::vector<int> idx(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < n0; ++i) {
    const int j = i + static_cast<int>(c_rng.below(static_cast<std::uint64_t>(N - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Eigen::VectorXd dir = c_rng.sphere(n0);
  state.c = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < n0; ++i) state.c[idx[static_cast<std::size_t>(i)]] = rho * dir[i];
  return state;
}

TrainTrace run_two_phase(const ModelState& state0, const TrainConfig& config,
                         const FeatureBank& bank, const Dataset& data,
                         const TeacherSpec* teacher) {
  if (std::abs(state0.theta.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("initial direction must be a unit vector");
  }
  if (config.t0_steps < 0 || config.t1_steps < 0) {
    throw std::invalid_argument("phase lengths must be >= 0");
  }
  const int total_steps = config.t0_steps + config.t1_steps;
  const int record_every = std::max(1, config.record_every);
  const double step_c = config.effective_step_c();

  TrainTrace trace;
  ModelState state = state0;
  state.renormalize();

  auto record = [&](int step, const LossAndGrads& lg) {
    TraceRecord r;
    r.step = step;
    r.m = teacher ? std::clamp(state.theta.dot(teacher->theta_star), -1.0, 1.0)
                  : std::numeric_limits<double>::quiet_NaN();
    r.loss = lg.loss;
    r.grad_c_norm = lg.grad_c.norm();
    r.grad_theta_norm = lg.grad_theta_sph.norm();
    r.c_norm = state.c.norm();
    trace.records.push_back(r);
  };

  double loss = 0.0;
  for (int t = 0; t <= total_steps; ++t) {
    const LossAndGrads lg = loss_and_grads(state, bank, data, config.lambda);
    loss = lg.loss;
    if (!std::isfinite(loss) || loss > config.divergence_threshold) {
      record(t, lg);
      trace.status = TrainStatus::diverged;
      trace.final_state = state;
      return trace;
    }
    if (t % record_every == 0) record(t, lg);
    if (t == total_steps) break;

    const bool update_c = t >= config.t0_steps;  // zeta(t) = 1(t > T0)
    double eta_theta = config.step_theta;
    double eta_c = step_c;
    ModelState candidate = state;
    bool accepted = false;
    for (int h = 0; h <= config.max_halvings; ++h) {
      candidate.theta = state.theta - eta_theta * lg.grad_theta_sph;
      candidate.renormalize();
      if (update_c) candidate.c = state.c - eta_c * lg.grad_c;
      const double cand_loss = empirical_loss(candidate, bank, data, config.lambda);
      if (cand_loss <= loss + config.backoff_tol) {
        accepted = true;
        break;
      }
      eta_theta *= 0.5;
      eta_c *= 0.5;
    }
    if (accepted) state = candidate;  // otherwise keep the current point
  }
  trace.final_state = state;
  return trace;
}

Eigen::VectorXd fine_tune_ridge(const Eigen::VectorXd& theta_hat, const FeatureBank& bank,
                                const Dataset& fresh_data, double lambda_ft) {
  if (lambda_ft <= 0.0) throw std::invalid_argument("fine-tuning requires lambda > 0");
  if (std::abs(theta_hat.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("fine-tuning requires a unit direction");
  }
  if (fresh_data.stream_tag == "train") {
    throw std::invalid_argument("fine-tuning requires a fresh sample stream, got the training tag");
  }
  const int n = fresh_data.n();
  const int N = bank.size();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
  const Eigen::VectorXd u = fresh_data.xs * theta_hat;

  Eigen::MatrixXd feat(n, N);
#pragma omp parallel for schedule(static) num_threads(par::max_threads())
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < N; ++k) {
      feat(i, k) =
          inv_sqrt_n * bank.activation.value(bank.signs[k] * u[i] - bank.biases[k]);
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(N, N);
  a.selfadjointView<Eigen::Lower>().rankUpdate(feat.transpose(), 1.0 / n);
  a = a.selfadjointView<Eigen::Lower>();
  a.diagonal().array() += lambda_ft;
  const Eigen::VectorXd rhs = feat.transpose() * fresh_data.ys / n;

  // power iteration bounds the condition number from above by ||A|| / lambda
  Eigen::VectorXd v = Eigen::VectorXd::Ones(N) / std::sqrt(static_cast<double>(N));
  double top = 0.0;
  for (int it = 0; it < 30; ++it) {
    v = a * v;
    top = v.norm();
    if (top == 0.0) break;
    v /= top;
  }
  if (top / lambda_ft > 1e12) {
    throw std::runtime_error("fine-tuning system is ill-conditioned (cond > 1e12)");
  }

  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("fine-tuning normal equations are not positive definite");
  }
  return llt.solve(rhs);
}

double fine_tune_lambda_default(const TeacherSpec& teacher, double tau, int n_fresh,
                                double sigma) {
  const double beta = (1.0 - 1.0 / (tau * tau)) / (3.0 + 1.0 / (tau * tau));
  const DerivativeNorms dn = derivative_norms(teacher.series);
  const double f2 = std::max(dn.f_second * dn.f_second, 1e-8);
  const double s2 = std::max(sigma * sigma, 1e-12);
  return std::pow(s2 * tau * tau / (f2 * n_fresh), 1.0 / (beta + 1.0));
}

RiskEstimate excess_risk(const ModelState& state, const FeatureBank& bank,
                         const TeacherSpec& teacher, int n_test, std::uint64_t seed) {
  if (n_test < 1) throw std::invalid_argument("test sample count must be >= 1");
  const int d = static_cast<int>(teacher.theta_star.size());
  Rng rng = Rng::stream(seed, "test/x");
  Eigen::MatrixXd xs(n_test, d);
  for (int i = 0; i < n_test; ++i) {
    for (int j = 0; j < d; ++j) xs(i, j) = rng.normal();
  }
  const Eigen::VectorXd u = xs * state.theta;
  const Eigen::VectorXd u_star = xs * teacher.theta_star;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(bank.size()));

  struct Acc {
    double sum = 0.0, sum_sq = 0.0;
  };
  Acc total = par::block_reduce<Acc>(
      n_test, Acc{},
      [&](std::int64_t lo, std::int64_t hi, Acc& acc) {
        for (std::int64_t i = lo; i < hi; ++i) {
          double value = 0.0;
          for (int k = 0; k < bank.size(); ++k) {
            value += state.c[k] *
                     bank.activation.value(bank.signs[k] * u[i] - bank.biases[k]);
          }
          value *= inv_sqrt_n;
          const double e = value - teacher.eval(u_star[i]);
          acc.sum += e * e;
          acc.sum_sq += e * e * e * e;
        }
      },
      [](Acc& x, const Acc& y) {
        x.sum += y.sum;
        x.sum_sq += y.sum_sq;
      });
  RiskEstimate est;
  est.value = total.sum / n_test;
  const double var = std::max(0.0, total.sum_sq / n_test - est.value * est.value);
  est.std_error = std::sqrt(var / n_test);
  return est;
}

}  // namespace sindex
