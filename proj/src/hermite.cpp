#include "sindex/hermite.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "sindex/gaussian.hpp"

namespace sindex {

HermiteSeries HermiteSeries::zeros(int order) {
  if (order < 0) throw std::invalid_argument("truncation order must be >= 0");
  return HermiteSeries(Eigen::VectorXd::Zero(order + 1));
}

HermiteSeries HermiteSeries::basis(int j, int order) {
  HermiteSeries s = zeros(order);
  if (j < 0 || j > order) throw std::invalid_argument("basis index out of range");
  s.coeffs[j] = 1.0;
  return s;
}

double HermiteSeries::eval(double z) const {
  const int J = truncation_order();
  double acc = 0.0, hm1 = 0.0, h = 1.0;
  for (int j = 0; j <= J; ++j) {
    acc += coeffs[j] * h;
    const double hp1 = (z * h - std::sqrt(static_cast<double>(j)) * hm1) /
                       std::sqrt(static_cast<double>(j + 1));
    hm1 = h;
    h = hp1;
  }
  return acc;
}

HermiteSeries HermiteSeries::derivative() const {
  const int J = truncation_order();
  if (J == 0) return zeros(0);
  Eigen::VectorXd d(J);
  for (int j = 0; j < J; ++j) d[j] = std::sqrt(static_cast<double>(j + 1)) * coeffs[j + 1];
  return HermiteSeries(std::move(d));
}

std::string to_json(const HermiteSeries& s) {
  nlohmann::json j;
  j["coeffs"] = std::vector<double>(s.coeffs.data(), s.coeffs.data() + s.coeffs.size());
  j["truncation_order"] = s.truncation_order();
  return j.dump();
}

HermiteSeries hermite_series_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto v = j.at("coeffs").get<std::vector<double>>();
  HermiteSeries s(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size())));
  if (j.contains("truncation_order") &&
      j["truncation_order"].get<int>() != s.truncation_order()) {
    throw std::invalid_argument("truncation_order does not match coeffs length");
  }
  return s;
}

double eval_hermite(int j, double z) {
  if (j < 0) throw std::invalid_argument("hermite index must be >= 0");
  double hm1 = 0.0, h = 1.0;
  for (int k = 0; k < j; ++k) {
    const double hp1 = (z * h - std::sqrt(static_cast<double>(k)) * hm1) /
                       std::sqrt(static_cast<double>(k + 1));
    hm1 = h;
    h = hp1;
  }
  return h;
}

void eval_hermite_all(int J, double z, double* out) {
  out[0] = 1.0;
  if (J == 0) return;
  out[1] = z;
  for (int k = 1; k < J; ++k) {
    out[k + 1] = (z * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                 std::sqrt(static_cast<double>(k + 1));
  }
}

namespace {

// Golub-Welsch: eigen-decompose the symmetric tridiagonal Jacobi matrix.
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double mu0,
                  Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  nodes = es.eigenvalues();
  const int n = static_cast<int>(diag.size());
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

struct GaussLegendre {
  Eigen::VectorXd x, w;  // on [-1, 1]
};

const GaussLegendre& legendre_rule(int n) {
  static std::map<int, GaussLegendre> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(n - 1);
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    sub[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  GaussLegendre gl;
  golub_welsch(diag, sub, 2.0, gl.x, gl.w);
  return cache.emplace(n, std::move(gl)).first->second;
}

}  // namespace

QuadratureRule QuadratureRule::gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("node count must be >= 1");
  // weight exp(-x^2): a_k = 0, b_k = sqrt(k/2), mu0 = sqrt(pi)
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  QuadratureRule rule;
  golub_welsch(diag, sub, std::sqrt(M_PI), rule.nodes, rule.weights);
  // change of variables to the standard Gaussian density
  rule.nodes *= std::sqrt(2.0);
  rule.weights /= std::sqrt(M_PI);
  return rule;
}

QuadratureRule QuadratureRule::composite(const std::vector<double>& knots, double z_max,
                                         double max_panel, int nodes_per_panel) {
  if (z_max <= 0.0 || max_panel <= 0.0 || nodes_per_panel < 2) {
    throw std::invalid_argument("bad composite rule parameters");
  }
  std::set<double> edges;
  const int n_lattice = static_cast<int>(std::ceil(2.0 * z_max / max_panel));
  for (int i = 0; i <= n_lattice; ++i) {
    edges.insert(-z_max + 2.0 * z_max * i / n_lattice);
  }
  for (double k : knots) {
    if (k > -z_max && k < z_max) edges.insert(k);
  }
  const GaussLegendre& gl = legendre_rule(nodes_per_panel);
  std::vector<double> ns, ws;
  double prev = *edges.begin();
  for (auto it = std::next(edges.begin()); it != edges.end(); ++it) {
    const double lo = prev, hi = *it;
    prev = hi;
    if (hi - lo < 1e-13) continue;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int q = 0; q < nodes_per_panel; ++q) {
      const double z = mid + half * gl.x[q];
      ns.push_back(z);
      ws.push_back(half * gl.w[q] * gauss::pdf(z));
    }
  }
  QuadratureRule rule;
  rule.nodes = Eigen::Map<Eigen::VectorXd>(ns.data(), static_cast<long>(ns.size()));
  rule.weights = Eigen::Map<Eigen::VectorXd>(ws.data(), static_cast<long>(ws.size()));
  return rule;
}

HermiteSeries project_to_series(const std::function<double(double)>& f, int J,
                                const QuadratureRule& quad) {
  if (J < 0) throw std::invalid_argument("truncation order must be >= 0");
  if (quad.node_count() < J + 1) {
    throw std::invalid_argument("quadrature rule too coarse for requested order (aliasing)");
  }
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(J + 1);
  std::vector<double> h(static_cast<std::size_t>(J) + 1);
  for (int q = 0; q < quad.node_count(); ++q) {
    const double z = quad.nodes[q];
    const double wf = quad.weights[q] * f(z);
    eval_hermite_all(J, z, h.data());
    for (int j = 0; j <= J; ++j) alpha[j] += wf * h[j];
  }
  return HermiteSeries(std::move(alpha));
}

HermiteSeries relu_coeffs_closed_form(int J) {
  HermiteSeries s = HermiteSeries::zeros(J);
  s.coeffs[0] = gauss::kInvSqrt2Pi;
  if (J >= 1) s.coeffs[1] = 0.5;
  for (int j = 2; j <= J; j += 2) {
    // |alpha_j| = j (j-2)! / ((j/2)! 2^{j/2} sqrt(2 pi j!)), via lgamma
    const double lg = std::log(static_cast<double>(j)) + std::lgamma(j - 1.0) -
                      std::lgamma(j / 2.0 + 1.0) - 0.5 * j * std::log(2.0) -
                      0.5 * (std::log(2.0 * M_PI) + std::lgamma(j + 1.0));
    const double sign = ((j - 2) / 2) % 2 == 0 ? 1.0 : -1.0;
    s.coeffs[j] = sign * std::exp(lg);
  }
  return s;
}

HermiteSeries ou_transform(const HermiteSeries& s, double rho) {
  if (std::abs(rho) > 1.0) throw std::invalid_argument("|rho| must be <= 1");
  HermiteSeries out = s;
  double p = 1.0;
  for (int j = 0; j <= s.truncation_order(); ++j) {
    out.coeffs[j] *= p;
    p *= rho;
  }
  return out;
}

int information_exponent(const HermiteSeries& s, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("tolerance must be positive");
  for (int j = 1; j <= s.truncation_order(); ++j) {
    if (std::abs(s.coeffs[j]) > tol) return j;
  }
  throw std::runtime_error("no nonzero coefficient above tolerance for j >= 1");
}

HermiteSeries strip_low_order(const HermiteSeries& s, int s_target) {
  if (s_target < 1) throw std::invalid_argument("strip order must be >= 1");
  HermiteSeries out = s;
  for (int j = 0; j < s_target && j <= out.truncation_order(); ++j) out.coeffs[j] = 0.0;
  const double nrm = std::sqrt(out.norm_sq());
  if (nrm < 1e-14) throw std::runtime_error("series tail above strip order is zero");
  out.coeffs /= nrm;
  return out;
}

DerivativeNorms derivative_norms(const HermiteSeries& s) {
  double n0 = 0.0, n1 = 0.0, n2 = 0.0, mixed = 0.0;
  for (int j = 0; j <= s.truncation_order(); ++j) {
    const double a2 = s.coeffs[j] * s.coeffs[j];
    const double jj = static_cast<double>(j);
    n0 += a2;
    n1 += jj * a2;
    n2 += jj * (jj - 1.0) * a2;
    mixed += jj * jj * (jj - 1.0) * (jj - 1.0) * a2;
  }
  return {std::sqrt(n0), std::sqrt(n1), std::sqrt(n2), mixed};
}

double estimate_tail_mass(const HermiteSeries& s) {
  const int J = s.truncation_order();
  // average |alpha| over the last two parity classes; extrapolate the squared
  // mass geometrically with the observed decade-over-decade ratio
  if (J < 8) return 0.0;
  double recent = 0.0, older = 0.0;
  for (int j = J - 3; j <= J; ++j) recent += s.coeffs[j] * s.coeffs[j];
  for (int j = J - 7; j <= J - 4; ++j) older += s.coeffs[j] * s.coeffs[j];
  if (older <= 0.0) return recent;
  double r = recent / older;
  if (r >= 0.999) r = 0.999;
  return recent * r / (1.0 - r);
}

}  // namespace sindex
