#include "sindex/features.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "sindex/gaussian.hpp"
#include "sindex/parallel.hpp"
#include "sindex/rng.hpp"

namespace sindex {

double ActivationSpec::value(double t) const {
  if (kind == Activation::relu) return t > 0.0 ? t : 0.0;
  return gauss::smoothed_relu(rho, t);
}

double ActivationSpec::deriv(double t) const {
  if (kind == Activation::relu) return t > 0.0 ? 1.0 : 0.0;
  return gauss::smoothed_relu_prime(rho, t);
}

FeatureBank sample_bank(int N, double tau, std::uint64_t seed, ActivationSpec activation) {
  if (N < 1) throw std::invalid_argument("bank size must be >= 1");
  if (tau <= 1.0) throw std::invalid_argument("tau must be > 1");
  if (activation.kind == Activation::smoothed_relu &&
      (activation.rho < 0.0 || activation.rho > 1.0)) {
    throw std::invalid_argument("smoothing level must be in [0, 1]");
  }
  FeatureBank bank;
  bank.tau = tau;
  bank.activation = activation;
  bank.seed = seed;
  bank.biases.resize(N);
  bank.signs.resize(N);
  Rng rng = Rng::stream(seed, "feature_bank");
  for (int i = 0; i < N; ++i) bank.biases[i] = tau * rng.normal();
  for (int i = 0; i < N; ++i) bank.signs[i] = rng.rademacher();
  return bank;
}

std::string to_json(const FeatureBank& bank, bool include_arrays) {
  nlohmann::json j;
  j["seed"] = bank.seed;
  j["N"] = bank.size();
  j["tau"] = bank.tau;
  j["activation"] = bank.activation.kind == Activation::relu ? "relu" : "smoothed_relu";
  if (bank.activation.kind == Activation::smoothed_relu) j["rho"] = bank.activation.rho;
  if (include_arrays) {
    j["biases"] = std::vector<double>(bank.biases.data(), bank.biases.data() + bank.size());
    j["signs"] = std::vector<double>(bank.signs.data(), bank.signs.data() + bank.size());
  }
  return j.dump();
}

FeatureBank bank_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ActivationSpec act;
  if (j.value("activation", std::string("relu")) == "smoothed_relu") {
    act.kind = Activation::smoothed_relu;
    act.rho = j.value("rho", 0.9);
  }
  if (j.contains("biases")) {
    FeatureBank bank;
    bank.tau = j.at("tau").get<double>();
    bank.activation = act;
    bank.seed = j.value("seed", 0ull);
    const auto b = j.at("biases").get<std::vector<double>>();
    const auto s = j.at("signs").get<std::vector<double>>();
    if (b.size() != s.size()) throw std::invalid_argument("biases/signs length mismatch");
    bank.biases = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(b.size()));
    bank.signs = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<long>(s.size()));
    return bank;
  }
  return sample_bank(j.at("N").get<int>(), j.at("tau").get<double>(),
                     j.at("seed").get<std::uint64_t>(), act);
}

Eigen::VectorXd phi(const FeatureBank& bank, double u) {
  const int N = bank.size();
  const double inv = 1.0 / std::sqrt(static_cast<double>(N));
  Eigen::VectorXd out(N);
  for (int i = 0; i < N; ++i) {
    out[i] = inv * bank.activation.value(bank.signs[i] * u - bank.biases[i]);
  }
  return out;
}

Eigen::VectorXd phi_prime(const FeatureBank& bank, double u) {
  const int N = bank.size();
  const double inv = 1.0 / std::sqrt(static_cast<double>(N));
  Eigen::VectorXd out(N);
  for (int i = 0; i < N; ++i) {
    out[i] = inv * bank.signs[i] *
             bank.activation.deriv(bank.signs[i] * u - bank.biases[i]);
  }
  return out;
}

double empirical_kernel(const FeatureBank& bank, double u, double v) {
  double acc = 0.0;
  for (int i = 0; i < bank.size(); ++i) {
    acc += bank.activation.value(bank.signs[i] * u - bank.biases[i]) *
           bank.activation.value(bank.signs[i] * v - bank.biases[i]);
  }
  return acc / bank.size();
}

double kernel_quadrature(double tau, ActivationSpec activation, double u, double v,
                         int quad_nodes) {
  const QuadratureRule rule = QuadratureRule::gauss_hermite(quad_nodes);
  const double reach = tau * rule.nodes.cwiseAbs().maxCoeff();
  if (std::abs(u) > reach || std::abs(v) > reach) {
    throw std::runtime_error("kernel arguments exceed quadrature node range");
  }
  double acc = 0.0;
  for (int q = 0; q < rule.node_count(); ++q) {
    const double b = tau * rule.nodes[q];
    acc += 0.5 * rule.weights[q] *
           (activation.value(u - b) * activation.value(v - b) +
            activation.value(-u - b) * activation.value(-v - b));
  }
  return acc;
}

double kernel(double tau, ActivationSpec activation, double u, double v, int quad_nodes) {
  if (tau <= 1.0) throw std::invalid_argument("tau must be > 1");
  if (activation.smooth()) return kernel_quadrature(tau, activation, u, v, quad_nodes);
  // exact: E_b[relu(u-b) relu(v-b)] = tau^2 E_z[relu(-z + u/tau) relu(-z + v/tau)]
  const double t2 = tau * tau;
  return 0.5 * t2 *
         (gauss::relu_pair_moment(-u / tau, -1.0, -v / tau, -1.0) +
          gauss::relu_pair_moment(u / tau, -1.0, v / tau, -1.0));
}

double trace_sigma_hat(const FeatureBank& bank) {
  const int N = bank.size();
  if (bank.activation.smooth()) {
    const QuadratureRule rule = QuadratureRule::gauss_hermite(128);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      double s = 0.0;
      for (int q = 0; q < rule.node_count(); ++q) {
        const double f =
            bank.activation.value(bank.signs[i] * rule.nodes[q] - bank.biases[i]);
        s += rule.weights[q] * f * f;
      }
      acc += s;
    }
    return acc / N;
  }
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    acc += gauss::relu_pair_moment(bank.biases[i], bank.signs[i], bank.biases[i],
                                   bank.signs[i]);
  }
  return acc / N;
}

namespace {

// <h_j, relu(eps z - b)>_gamma, exact: partial Gaussian moments obey
// int_a^inf h_j gamma = h_{j-1}(a) gamma(a) / sqrt(j).
void relu_feature_hermite(int J, double b, double eps, double* out) {
  std::vector<double> h(static_cast<std::size_t>(J) + 2);
  eval_hermite_all(J + 1, b, h.data());
  const double pb = gauss::pdf(b);
  const double qb = gauss::upper(b);
  std::vector<double> ihat(static_cast<std::size_t>(J) + 2);
  ihat[0] = qb;
  for (int j = 1; j <= J + 1; ++j) ihat[j] = h[j - 1] * pb / std::sqrt(static_cast<double>(j));
  for (int j = 0; j <= J; ++j) {
    double v = h[j] * pb - b * ihat[j];
    if (j >= 1) v += std::sqrt(static_cast<double>(j)) * ihat[j - 1];
    if (eps < 0.0 && j % 2 == 1) v = -v;
    out[j] = v;
  }
}

}  // namespace

Eigen::VectorXd FeatureOperator::apply_t(const HermiteSeries& s) const {
  if (s.truncation_order() != order()) {
    throw std::invalid_argument("series order does not match operator order");
  }
  return t_vectors * s.coeffs;
}

Eigen::VectorXd FeatureOperator::solve_regularized(const Eigen::VectorXd& v) const {
  if (lambda <= 0.0) throw std::invalid_argument("regularized solve requires lambda > 0");
  return q_lambda_llt.solve(v);
}

FeatureOperator build_operator(const FeatureBank& bank, int J, double lambda,
                               const QuadratureRule& quad) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  const int N = bank.size();
  FeatureOperator op;
  op.lambda = lambda;
  op.t_vectors.resize(N, J + 1);
  op.gram.resize(N, N);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));

  if (!bank.activation.smooth()) {
    std::vector<double> row(static_cast<std::size_t>(J) + 1);
    for (int i = 0; i < N; ++i) {
      relu_feature_hermite(J, bank.biases[i], bank.signs[i], row.data());
      for (int j = 0; j <= J; ++j) op.t_vectors(i, j) = inv_sqrt_n * row[j];
    }
#pragma omp parallel for schedule(dynamic, 16) num_threads(par::max_threads())
    for (int i = 0; i < N; ++i) {
      for (int j = i; j < N; ++j) {
        const double v = gauss::relu_pair_moment(bank.biases[i], bank.signs[i],
                                                 bank.biases[j], bank.signs[j]) /
                         N;
        op.gram(i, j) = v;
        op.gram(j, i) = v;
      }
    }
  } else {
    if (quad.node_count() < 2 * J + 1) {
      throw std::invalid_argument("quadrature rule too coarse for operator assembly");
    }
    const int nq = quad.node_count();
    Eigen::MatrixXd feat(N, nq);
#pragma omp parallel for schedule(static) num_threads(par::max_threads())
    for (int i = 0; i < N; ++i) {
      for (int q = 0; q < nq; ++q) {
        feat(i, q) = bank.activation.value(bank.signs[i] * quad.nodes[q] - bank.biases[i]);
      }
    }
    Eigen::MatrixXd herm(J + 1, nq);
    std::vector<double> h(static_cast<std::size_t>(J) + 1);
    for (int q = 0; q < nq; ++q) {
      eval_hermite_all(J, quad.nodes[q], h.data());
      for (int j = 0; j <= J; ++j) herm(j, q) = h[j];
    }
    const Eigen::MatrixXd feat_w = feat * quad.weights.asDiagonal();
    op.t_vectors.noalias() = feat_w * herm.transpose() * inv_sqrt_n;
    op.gram.noalias() = feat_w * feat.transpose() / N;
    op.gram = 0.5 * (op.gram + op.gram.transpose()).eval();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.gram, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw std::runtime_error("assembled Q has a negative eigenvalue (quadrature inconsistency)");
  }
  if (lambda > 0.0) {
    Eigen::MatrixXd q_lambda = op.gram;
    q_lambda.diagonal().array() += lambda;
    op.q_lambda_llt.compute(q_lambda);
    if (op.q_lambda_llt.info() != Eigen::Success) {
      throw std::runtime_error("Cholesky factorization of Q_lambda failed");
    }
  }
  return op;
}

std::uint64_t operator_cache_key(const FeatureBank& bank, int J, double lambda,
                                 const QuadratureRule& quad) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  auto mixd = [&](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    mix(bits);
  };
  mix(bank.seed);
  mix(static_cast<std::uint64_t>(bank.size()));
  mixd(bank.tau);
  mix(bank.activation.kind == Activation::relu ? 1u : 2u);
  mixd(bank.activation.rho);
  for (int i = 0; i < bank.size(); ++i) mixd(bank.biases[i]);
  mix(static_cast<std::uint64_t>(J));
  mixd(lambda);
  mix(static_cast<std::uint64_t>(quad.node_count()));
  if (quad.node_count() > 0) {
    mixd(quad.nodes[0]);
    mixd(quad.nodes[quad.node_count() - 1]);
  }
  return h;
}

namespace {
constexpr std::uint64_t kOperatorMagic = 0x53494e4445584f50ull;  // "SINDEXOP"
}

void save_operator(const std::string& path, const FeatureOperator& op) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open operator cache for writing: " + path);
  const std::int64_t n = op.size(), cols = op.order() + 1;
  out.write(reinterpret_cast<const char*>(&kOperatorMagic), sizeof(kOperatorMagic));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(&op.lambda), sizeof(op.lambda));
  out.write(reinterpret_cast<const char*>(op.t_vectors.data()),
            static_cast<std::streamsize>(sizeof(double) * n * cols));
  out.write(reinterpret_cast<const char*>(op.gram.data()),
            static_cast<std::streamsize>(sizeof(double) * n * n));
}

bool load_operator(const std::string& path, double lambda, FeatureOperator& op) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t magic = 0;
  std::int64_t n = 0, cols = 0;
  double stored_lambda = 0.0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  in.read(reinterpret_cast<char*>(&stored_lambda), sizeof(stored_lambda));
  if (!in || magic != kOperatorMagic || n <= 0 || cols <= 0) return false;
  op.t_vectors.resize(n, cols);
  op.gram.resize(n, n);
  in.read(reinterpret_cast<char*>(op.t_vectors.data()),
          static_cast<std::streamsize>(sizeof(double) * n * cols));
  in.read(reinterpret_cast<char*>(op.gram.data()),
          static_cast<std::streamsize>(sizeof(double) * n * n));
  if (!in) return false;
  op.lambda = lambda;
  if (lambda > 0.0) {
    Eigen::MatrixXd q_lambda = op.gram;
    q_lambda.diagonal().array() += lambda;
    op.q_lambda_llt.compute(q_lambda);
    if (op.q_lambda_llt.info() != Eigen::Success) return false;
  }
  return true;
}

ProjectionResult regularized_projection(const FeatureOperator& op, const HermiteSeries& f) {
  if (op.lambda <= 0.0) {
    throw std::invalid_argument("regularized projection requires lambda > 0");
  }
  const Eigen::VectorXd tf = op.apply_t(f);
  ProjectionResult res;
  res.c = op.solve_regularized(tf);
  res.residual_sq =
      f.norm_sq() - 2.0 * res.c.dot(tf) + res.c.dot(op.gram * res.c);
  return res;
}

double rkhs_norm_bound(const HermiteSeries& f, const std::function<double(double)>& f_second,
                       double tau, double z_max, int panels) {
  if (tau <= 1.0) throw std::invalid_argument("tau must be > 1");
  // int |f''(t)|^2 / gamma_tau(t) dt, integrated outward in symmetric panels
  const double width = z_max / panels;
  const int gl_nodes = 16;
  const QuadratureRule probe = QuadratureRule::composite({}, 1.0, 2.0, gl_nodes);
  // reuse Legendre nodes on [-1, 1] from the composite helper
  std::vector<double> xs(gl_nodes), ws(gl_nodes);
  for (int q = 0; q < gl_nodes; ++q) {
    xs[q] = probe.nodes[q];
    ws[q] = probe.weights[q] / gauss::pdf(probe.nodes[q]);
  }
  auto weighted = [&](double t) {
    const double g_tau = gauss::pdf(t / tau) / tau;
    const double d2 = f_second(t);
    return d2 * d2 / g_tau;
  };
  double integral = 0.0, prev_pair = -1.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = k * width, hi = lo + width;
    double pair = 0.0;
    for (int q = 0; q < gl_nodes; ++q) {
      const double half = 0.5 * width;
      const double zq = 0.5 * (lo + hi) + half * xs[q];
      pair += half * ws[q] * (weighted(zq) + weighted(-zq));
    }
    integral += pair;
    if (k > panels / 2 && prev_pair >= 0.0 && pair > prev_pair + 1e-12 * (1.0 + integral)) {
      throw std::runtime_error("weighted |f''|^2 integrand fails the tail-decay check");
    }
    prev_pair = pair;
  }
  const DerivativeNorms dn = derivative_norms(f);
  double inner_ffpp = 0.0;  // <f, f''> from coefficients
  for (int j = 0; j + 2 <= f.truncation_order(); ++j) {
    inner_ffpp += f.coeffs[j] * std::sqrt((j + 1.0) * (j + 2.0)) * f.coeffs[j + 2];
  }
  return 6.0 * tau *
         (integral + dn.f * dn.f + 6.0 * dn.f_prime * dn.f_prime + 2.0 * inner_ffpp);
}

double smoothed_relu(double rho, double t) {
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must be in [0, 1]");
  return gauss::smoothed_relu(rho, t);
}

}  // namespace sindex
