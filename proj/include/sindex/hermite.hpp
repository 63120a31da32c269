#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace sindex {

// Truncated expansion f = sum_{j<=J} alpha_j h_j in the normalized
// probabilists' Hermite basis (orthonormal in L^2(gamma)).
struct HermiteSeries {
  Eigen::VectorXd coeffs;

  HermiteSeries() = default;
  explicit HermiteSeries(Eigen::VectorXd c) : coeffs(std::move(c)) {}
  static HermiteSeries zeros(int order);
  // e_j basis series of the given truncation order
  static HermiteSeries basis(int j, int order);

  int truncation_order() const { return static_cast<int>(coeffs.size()) - 1; }
  double norm_sq() const { return coeffs.squaredNorm(); }
  double eval(double z) const;
  // alpha_j -> sqrt(j+1) alpha_{j+1}; truncation order drops by one
  HermiteSeries derivative() const;
};

std::string to_json(const HermiteSeries& s);
HermiteSeries hermite_series_from_json(const std::string& text);

// Nodes and weights for integrating against the standard Gaussian measure;
// weights sum to 1 up to tail truncation.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int node_count() const { return static_cast<int>(nodes.size()); }

  // Gauss-Hermite rule mapped to the N(0,1) weight; exact for polynomials of
  // degree <= 2n-1.  Golub-Welsch on the Jacobi matrix.
  static QuadratureRule gauss_hermite(int n);

  // Composite Gauss-Legendre against the Gaussian density on [-z_max, z_max],
  // panel edges aligned with the given knots so kinked integrands stay smooth
  // within every panel.
  static QuadratureRule composite(const std::vector<double>& knots, double z_max = 12.0,
                                  double max_panel = 0.5, int nodes_per_panel = 16);

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (int i = 0; i < node_count(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

// Normalized Hermite value h_j(z) by the stable three-term recurrence.
double eval_hermite(int j, double z);
// h_0(z) .. h_J(z) into out (J+1 entries).
void eval_hermite_all(int J, double z, double* out);

// alpha_j = <f, h_j>_gamma for j = 0..J.  Throws std::invalid_argument when
// the rule has fewer than J+1 nodes (aliasing).
HermiteSeries project_to_series(const std::function<double(double)>& f, int J,
                                const QuadratureRule& quad);

// Exact ReLU coefficients: alpha_0 = 1/sqrt(2 pi), alpha_1 = 1/2, zero for odd
// j >= 3, and (H_j(0) + j H_{j-2}(0))/sqrt(2 pi j!) for even j >= 2.
HermiteSeries relu_coeffs_closed_form(int J);

// Ornstein-Uhlenbeck smoothing U_rho: alpha_j -> rho^j alpha_j.  |rho| <= 1.
HermiteSeries ou_transform(const HermiteSeries& s, double rho);

// Index of the first coefficient j >= 1 with |alpha_j| > tol.  Throws
// std::runtime_error when no such coefficient exists.
int information_exponent(const HermiteSeries& s, double tol = 1e-8);

// Zero coefficients 0..s-1 and renormalize to unit gamma-norm.  Throws when
// the remaining tail is zero.
HermiteSeries strip_low_order(const HermiteSeries& s, int s_target);

struct DerivativeNorms {
  double f;         // ||f||_gamma
  double f_prime;   // sqrt(sum j alpha_j^2)
  double f_second;  // sqrt(sum j(j-1) alpha_j^2)
  double mixed;     // sum j^2 (j-1)^2 alpha_j^2
};
DerivativeNorms derivative_norms(const HermiteSeries& s);

// Geometric extrapolation of sum_{j>J} alpha_j^2 from the observed decay.
double estimate_tail_mass(const HermiteSeries& s);

}  // namespace sindex
