#pragma once

#include <Eigen/Dense>

#include "sindex/model.hpp"

// Plain serial implementations of the hot kernels.  They are the correctness
// oracle for the parallel versions and the baseline for bench_kernels.
namespace sindex::ref {

double empirical_loss(const ModelState& state, const FeatureBank& bank,
                      const Dataset& data, double lambda);

Eigen::VectorXd grad_c(const ModelState& state, const FeatureBank& bank,
                       const Dataset& data, double lambda);

Eigen::VectorXd grad_theta_spherical(const ModelState& state, const FeatureBank& bank,
                                     const Dataset& data, double lambda);

// Quadrature Gram matrix (1/N) <phi_i, phi_j>_gamma, naive triple loop.
Eigen::MatrixXd gram_quadrature(const FeatureBank& bank, const QuadratureRule& quad);

}  // namespace sindex::ref
