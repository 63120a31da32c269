#include "sindex/reference.hpp"

#include <cmath>

namespace sindex::ref {

double empirical_loss(const ModelState& state, const FeatureBank& bank,
                      const Dataset& data, double lambda) {
  double acc = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double u = state.theta.dot(data.xs.row(i));
    const double r = state.c.dot(phi(bank, u)) - data.ys[i];
    acc += r * r;
  }
  return acc / data.n() + lambda * state.c.squaredNorm();
}

Eigen::VectorXd grad_c(const ModelState& state, const FeatureBank& bank,
                       const Dataset& data, double lambda) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(bank.size());
  for (int i = 0; i < data.n(); ++i) {
    const double u = state.theta.dot(data.xs.row(i));
    const Eigen::VectorXd f = phi(bank, u);
    const double r = state.c.dot(f) - data.ys[i];
    g += 2.0 * r * f;
  }
  return g / data.n() + 2.0 * lambda * state.c;
}

Eigen::VectorXd grad_theta_spherical(const ModelState& state, const FeatureBank& bank,
                                     const Dataset& data, double lambda) {
  (void)lambda;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(data.dim());
  for (int i = 0; i < data.n(); ++i) {
    const double u = state.theta.dot(data.xs.row(i));
    const double r = state.c.dot(phi(bank, u)) - data.ys[i];
    const double slope = state.c.dot(phi_prime(bank, u));
    g += 2.0 * r * slope * data.xs.row(i).transpose();
  }
  g /= data.n();
  return g - g.dot(state.theta) * state.theta;
}

Eigen::MatrixXd gram_quadrature(const FeatureBank& bank, const QuadratureRule& quad) {
  const int N = bank.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      double acc = 0.0;
      for (int t = 0; t < quad.node_count(); ++t) {
        const double z = quad.nodes[t];
        acc += quad.weights[t] *
               bank.activation.value(bank.signs[i] * z - bank.biases[i]) *
               bank.activation.value(bank.signs[j] * z - bank.biases[j]);
      }
      q(i, j) = q(j, i) = acc / N;
    }
  }
  return q;
}

}  // namespace sindex::ref
