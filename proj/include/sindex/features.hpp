#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "sindex/hermite.hpp"

namespace sindex {

enum class Activation { relu, smoothed_relu };

struct ActivationSpec {
  Activation kind = Activation::relu;
  double rho = 1.0;  // smoothing level, only read for smoothed_relu

  double value(double t) const;
  double deriv(double t) const;  // relu'(0) = 0 convention
  bool smooth() const { return kind == Activation::smoothed_relu && rho < 1.0; }
};

// N frozen random biases b_i ~ N(0, tau^2) and Rademacher signs; together with
// the activation they define the feature map Phi(u) = (phi(eps_i u - b_i))/sqrt(N).
struct FeatureBank {
  Eigen::VectorXd biases;
  Eigen::VectorXd signs;
  double tau = 2.0;
  ActivationSpec activation;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(biases.size()); }
};

// Deterministic draw; rejects tau <= 1.
FeatureBank sample_bank(int N, double tau, std::uint64_t seed,
                        ActivationSpec activation = {});

std::string to_json(const FeatureBank& bank, bool include_arrays = false);
FeatureBank bank_from_json(const std::string& text);

Eigen::VectorXd phi(const FeatureBank& bank, double u);
Eigen::VectorXd phi_prime(const FeatureBank& bank, double u);

// Population kernel kappa(u,v) = E_{b,eps}[phi(eps u - b) phi(eps v - b)],
// b ~ N(0, tau^2).  ReLU uses the exact partial-moment form; smoothed
// activations integrate over b with Gauss-Hermite.
double kernel(double tau, ActivationSpec activation, double u, double v,
              int quad_nodes = 256);
// Quadrature evaluation regardless of activation (cross-check path).
double kernel_quadrature(double tau, ActivationSpec activation, double u, double v,
                         int quad_nodes);

// kappa_hat(u,v) = Phi(u)^T Phi(v)
double empirical_kernel(const FeatureBank& bank, double u, double v);

// tr(Sigma_hat) = (1/N) sum_i ||phi_i||_gamma^2
double trace_sigma_hat(const FeatureBank& bank);

// T_j columns, Gram Q = T T^*, and the lambda-regularized solve.
struct FeatureOperator {
  Eigen::MatrixXd t_vectors;  // N x (J+1); column j is T h_j
  Eigen::MatrixXd gram;       // Q, N x N
  double lambda = 0.0;
  Eigen::LLT<Eigen::MatrixXd> q_lambda_llt;

  int order() const { return static_cast<int>(t_vectors.cols()) - 1; }
  int size() const { return static_cast<int>(t_vectors.rows()); }
  Eigen::VectorXd apply_t(const HermiteSeries& s) const;            // T f
  Eigen::VectorXd solve_regularized(const Eigen::VectorXd& v) const;  // Q_lambda^{-1} v
};

// Assemble T and Q.  ReLU banks use exact closed forms; smooth activations use
// the supplied rule.  Fails if Q has an eigenvalue below -1e-10.
FeatureOperator build_operator(const FeatureBank& bank, int J, double lambda,
                               const QuadratureRule& quad);

// Binary cache for assembled operators, keyed by (bank, J, lambda, rule).
std::uint64_t operator_cache_key(const FeatureBank& bank, int J, double lambda,
                                 const QuadratureRule& quad);
void save_operator(const std::string& path, const FeatureOperator& op);
bool load_operator(const std::string& path, double lambda, FeatureOperator& op);

struct ProjectionResult {
  Eigen::VectorXd c;
  double residual_sq;  // ||(I - P_lambda) f||_gamma^2
};

// min_c ||f - c^T Phi||^2 + lambda ||c||^2; lambda must be positive.
ProjectionResult regularized_projection(const FeatureOperator& op, const HermiteSeries& f);

// Right-hand side of the RKHS norm bound
//   6 tau ( int |f''|^2 / gamma_tau + ||f||^2 + 6 ||f'||^2 + 2 <f, f''> ).
// The weighted integral uses the supplied second-derivative callable and
// reports divergence when its tail fails to decay.
double rkhs_norm_bound(const HermiteSeries& f, const std::function<double(double)>& f_second,
                       double tau, double z_max = 8.0, int panels = 64);

double smoothed_relu(double rho, double t);  // rejects rho outside [0, 1]

}  // namespace sindex
