#pragma once

#include <cmath>

namespace sindex::gauss {

inline constexpr double kSqrt2Pi = 2.5066282746310005024;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;

inline double pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// upper tail P[Z >= a]
inline double upper(double a) { return 0.5 * std::erfc(a * 0.70710678118654752440); }

inline double cdf(double a) { return 0.5 * std::erfc(-a * 0.70710678118654752440); }

// Upper partial moments  M_k(a) = int_a^inf z^k pdf(z) dz  for k = 0, 1, 2.
inline double m0(double a) { return upper(a); }
inline double m1(double a) { return pdf(a); }
inline double m2(double a) { return a * pdf(a) + upper(a); }

// int_a^inf (z - b1)(z - b2) pdf(z) dz
inline double quad_upper(double a, double b1, double b2) {
  return m2(a) - (b1 + b2) * m1(a) + b1 * b2 * m0(a);
}

// E[ relu(e1 z - b1) relu(e2 z - b2) ] for z ~ N(0,1), signs e1,e2 in {-1,+1}.
// Piecewise-polynomial integrand, so the expectation reduces to partial
// Gaussian moments.
inline double relu_pair_moment(double b1, double e1, double b2, double e2) {
  if (e1 == e2) {
    const double a = b1 > b2 ? b1 : b2;
    return quad_upper(a, b1, b2);
  }
  // opposite signs: support is the interval where both arguments are positive
  double lo, hi, lin;
  if (e1 > 0.0) {  // z > b1 and z < -b2
    lo = b1;
    hi = -b2;
    lin = b1 - b2;
  } else {  // z > b2 and z < -b1
    lo = b2;
    hi = -b1;
    lin = b2 - b1;
  }
  if (lo >= hi) return 0.0;
  // (e1 z - b1)(e2 z - b2) = -z^2 + lin * z + b1 b2 on the support
  return -(m2(lo) - m2(hi)) + lin * (m1(lo) - m1(hi)) + b1 * b2 * (m0(lo) - m0(hi));
}

// Gaussian-smoothed ReLU  phi_rho = U_rho relu  and its first two derivatives.
// For X ~ N(mu, s^2),  E max(0, X) = mu * cdf(mu/s) + s * pdf(mu/s).
inline double smoothed_relu(double rho, double t) {
  if (rho >= 1.0) return t > 0.0 ? t : 0.0;
  if (rho <= 0.0) return kInvSqrt2Pi;
  const double s = std::sqrt(1.0 - rho * rho);
  const double a = rho * t / s;
  return rho * t * cdf(a) + s * pdf(a);
}

inline double smoothed_relu_prime(double rho, double t) {
  if (rho >= 1.0) return t > 0.0 ? 1.0 : 0.0;  // relu'(0) = 0
  if (rho <= 0.0) return 0.0;
  const double s = std::sqrt(1.0 - rho * rho);
  return rho * cdf(rho * t / s);
}

inline double smoothed_relu_second(double rho, double t) {
  if (rho >= 1.0 || rho <= 0.0) return 0.0;
  const double s = std::sqrt(1.0 - rho * rho);
  return rho * rho / s * pdf(rho * t / s);
}

}  // namespace sindex::gauss
