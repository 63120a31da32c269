#pragma once

#include <Eigen/Dense>
#include <string>

#include "sindex/datagen.hpp"
#include "sindex/features.hpp"

namespace sindex {

// Trainable state of the shallow network G(x; c, theta) = c^T Phi(<theta, x>).
struct ModelState {
  Eigen::VectorXd c;      // second-layer weights, length N
  Eigen::VectorXd theta;  // shared unit direction, length d

  void renormalize() { theta /= theta.norm(); }
};

std::string to_json(const ModelState& state);
ModelState model_state_from_json(const std::string& text);

double forward(const ModelState& state, const FeatureBank& bank,
               const Eigen::Ref<const Eigen::VectorXd>& x);

// (1/n) sum (c^T Phi(<theta, x_i>) - y_i)^2 + lambda ||c||^2
double empirical_loss(const ModelState& state, const FeatureBank& bank,
                      const Dataset& data, double lambda);

Eigen::VectorXd grad_c(const ModelState& state, const FeatureBank& bank,
                       const Dataset& data, double lambda);

// Euclidean gradient projected onto the tangent space at theta; requires
// ||theta|| = 1.
Eigen::VectorXd grad_theta_spherical(const ModelState& state, const FeatureBank& bank,
                                     const Dataset& data, double lambda);

// One fused pass over the data; used by the training loop.
struct LossAndGrads {
  double loss;
  Eigen::VectorXd grad_c;
  Eigen::VectorXd grad_theta_sph;
};
LossAndGrads loss_and_grads(const ModelState& state, const FeatureBank& bank,
                            const Dataset& data, double lambda);

// True when no (sample, feature) pair sits within `margin` of a ReLU kink;
// at such states the ReLU loss is differentiable and finite differences are
// trustworthy.
bool kink_free(const ModelState& state, const FeatureBank& bank, const Dataset& data,
               double margin = 1e-4);

}  // namespace sindex
