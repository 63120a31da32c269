#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sindex/model.hpp"

namespace sindex {

// Discretized two-phase gradient flow: explicit Euler, theta renormalized
// after every step, c frozen until t0_steps have passed.
struct TrainConfig {
  double lambda = 1e-3;
  double step_theta = 0.1;
  double step_ratio = 100.0;  // theta step is step_ratio times the c step
  double step_c = 0.0;        // 0 -> step_theta / step_ratio
  int t0_steps = 500;
  int t1_steps = 9500;
  double rho_init = 0.0;  // 0 -> sqrt(N) N0^{-(2+s)/2} / (tau^2 + lambda N / N0)
  int n0 = 0;             // 0 -> max(3, ceil(log 10))
  int s_hint = 1;         // information exponent used by the rho_init default
  std::uint64_t seed = 0;
  int record_every = 100;
  double backoff_tol = 1e-10;
  int max_halvings = 30;
  double divergence_threshold = 1e6;

  double effective_step_c() const { return step_c > 0.0 ? step_c : step_theta / step_ratio; }
};

struct TraceRecord {
  int step;
  double m;  // <theta, theta*>, NaN when no teacher was supplied
  double loss;
  double grad_c_norm;
  double grad_theta_norm;
  double c_norm;
};

enum class TrainStatus { ok, diverged };

struct TrainTrace {
  std::vector<TraceRecord> records;
  ModelState final_state;
  TrainStatus status = TrainStatus::ok;
};

void write_trace_csv(const TrainTrace& trace, const std::string& path);

// theta uniform on the sphere; c supported on a uniform n0-subset with a
// uniform direction on that subsphere, scaled to rho_init.
ModelState init_state(const TrainConfig& config, const FeatureBank& bank, int d,
                      std::uint64_t seed);

TrainTrace run_two_phase(const ModelState& state0, const TrainConfig& config,
                         const FeatureBank& bank, const Dataset& data,
                         const TeacherSpec* teacher = nullptr);

// Exact ridge refit of the second layer at fixed direction on fresh samples:
// ((1/n') sum Phi_i Phi_i^T + lambda' I) c = (1/n') sum y_i Phi_i.
// Rejects data tagged as the training stream and condition numbers > 1e12.
Eigen::VectorXd fine_tune_ridge(const Eigen::VectorXd& theta_hat, const FeatureBank& bank,
                                const Dataset& fresh_data, double lambda_ft);

// Prop-style default lambda_{n'} = (sigma^2 tau^2 / (||f''||^2 n'))^{1/(beta+1)}.
double fine_tune_lambda_default(const TeacherSpec& teacher, double tau, int n_fresh,
                                double sigma);

struct RiskEstimate {
  double value;
  double std_error;
};

// Monte-Carlo estimate of E_x[(G(x) - f_*(<theta*, x>))^2] on a fresh seeded
// test stream.
RiskEstimate excess_risk(const ModelState& state, const FeatureBank& bank,
                         const TeacherSpec& teacher, int n_test, std::uint64_t seed);

}  // namespace sindex
