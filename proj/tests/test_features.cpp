#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sindex/features.hpp"
#include "sindex/gaussian.hpp"
#include "sindex/reference.hpp"
#include "sindex/rng.hpp"

using namespace sindex;

TEST_CASE("sample_bank determinism and parameter checks") {
  const FeatureBank a = sample_bank(256, 2.0, 17);
  const FeatureBank b = sample_bank(256, 2.0, 17);
  CHECK(a.biases == b.biases);
  CHECK(a.signs == b.signs);
  CHECK_THROWS_AS(sample_bank(16, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_bank(0, 2.0, 1), std::invalid_argument);
}

TEST_CASE("bank statistics match the sampling law") {
  const int N = 100000;
  const FeatureBank bank = sample_bank(N, 2.0, 4);
  const double mean_b = bank.biases.mean();
  const double sd = std::sqrt((bank.biases.array() - mean_b).square().mean());
  CHECK(sd == doctest::Approx(2.0).epsilon(0.01));
  CHECK(std::abs(bank.signs.mean()) <= 3.0 / std::sqrt(double(N)));
}

TEST_CASE("phi and phi_prime single-feature cases") {
  FeatureBank bank;
  bank.biases = Eigen::VectorXd::Zero(1);
  bank.signs = Eigen::VectorXd::Ones(1);
  bank.tau = 2.0;
  CHECK(phi(bank, 2.0)[0] == doctest::Approx(2.0));
  CHECK(phi(bank, -1.0)[0] == 0.0);
  CHECK(phi_prime(bank, 0.0)[0] == 0.0);  // relu'(0) = 0
  CHECK(phi_prime(bank, 1.0)[0] == doctest::Approx(1.0));
}

TEST_CASE("feature norm bound holds with the stated frequency") {
  // ||Phi(z)|| <= |z| + 2 tau sqrt(log(1/delta)) on at least 1-delta of banks
  const double delta = 0.1, tau = 2.0;
  const double slack = 2.0 * tau * std::sqrt(std::log(1.0 / delta));
  int bad = 0;
  const int banks = 200;
  for (int b = 0; b < banks; ++b) {
    const FeatureBank bank = sample_bank(128, tau, 1000 + b);
    for (double z : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
      if (phi(bank, z).norm() > std::abs(z) + slack) {
        ++bad;
        break;
      }
    }
  }
  CHECK(bad <= banks * delta);
}

TEST_CASE("smoothed phi_prime matches central differences") {
  const FeatureBank bank = sample_bank(32, 2.0, 5, {Activation::smoothed_relu, 0.8});
  const double h = 1e-6;
  for (double u : {-1.7, 0.0, 0.4, 2.2}) {
    const Eigen::VectorXd fd = (phi(bank, u + h) - phi(bank, u - h)) / (2 * h);
    CHECK((phi_prime(bank, u) - fd).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("kernel symmetry and closed form vs monte carlo") {
  for (auto [u, v] : {std::pair{0.3, -1.2}, std::pair{1.0, 2.0}, std::pair{0.0, 0.0}}) {
    CHECK(kernel(2.0, {}, u, v) == doctest::Approx(kernel(2.0, {}, v, u)).epsilon(1e-14));
  }
  // MC over b, eps with 10^7 draws
  Rng rng(21);
  const int draws = 10000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double b = 2.0 * rng.normal();
    const double eps = rng.rademacher();
    const double f = std::max(0.0, eps * 0.0 - b);
    sum += f * f;
    sum_sq += f * f * f * f;
  }
  const double mc = sum / draws;
  const double se = std::sqrt(
      std::max(0.0, sum_sq / draws - mc * mc) / draws);
  CHECK(std::abs(kernel(2.0, {}, 0.0, 0.0) - mc) <= 3.0 * se);
}

TEST_CASE("kernel quadrature path agrees with the closed form") {
  // smooth activation: quadrature is the primary path; compare against rho->1
  const double q = kernel_quadrature(2.0, {Activation::smoothed_relu, 0.999999}, 0.5, -0.3, 512);
  const double c = kernel(2.0, {}, 0.5, -0.3);
  CHECK(q == doctest::Approx(c).epsilon(1e-3));
  CHECK_THROWS_AS(kernel_quadrature(2.0, {}, 100.0, 0.0, 64), std::runtime_error);
}

TEST_CASE("empirical kernel converges at the root-N rate") {
  const std::vector<double> us{-1.1, -0.6, -0.2, 0.0, 0.3, 0.9, 1.4, 2.0, -1.8, 0.7};
  const std::vector<double> vs{0.5, -1.0, 0.8, 1.2, -0.4, 0.1, -1.5, 0.6, 1.1, -0.9};
  std::vector<int> sizes{100, 1000, 10000, 100000};
  std::vector<double> devs;
  for (int N : sizes) {
    double dev = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      const FeatureBank bank = sample_bank(N, 2.0, 40 + rep);
      for (std::size_t k = 0; k < us.size(); ++k) {
        dev += std::abs(empirical_kernel(bank, us[k], vs[k]) -
                        kernel(2.0, {}, us[k], vs[k]));
      }
    }
    devs.push_back(dev / (3.0 * us.size()));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double x = std::log(double(sizes[i])), y = std::log(devs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope =
      (sizes.size() * sxy - sx * sy) / (sizes.size() * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.3));  // -0.5 +- 0.15
}

TEST_CASE("kernel gram on a 5-point set is psd") {
  const std::vector<double> pts{-1.2, -0.3, 0.0, 0.7, 1.9};
  Eigen::MatrixXd k(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) k(i, j) = kernel(2.0, {}, pts[i], pts[j]);
  }
  CHECK(k(0, 0) >= 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("build_operator single relu feature") {
  FeatureBank bank;
  bank.biases = Eigen::VectorXd::Constant(1, 0.5);
  bank.signs = Eigen::VectorXd::Ones(1);
  bank.tau = 2.0;
  const QuadratureRule quad = QuadratureRule::gauss_hermite(128);
  const FeatureOperator op = build_operator(bank, 8, 0.0, quad);
  // Q is the squared feature norm
  CHECK(op.gram(0, 0) == doctest::Approx(trace_sigma_hat(bank)));
  // T entries are <h_j, phi>
  const QuadratureRule fine = QuadratureRule::composite({0.5});
  for (int j = 0; j <= 8; ++j) {
    const double expect = fine.integrate(
        [&](double z) { return eval_hermite(j, z) * std::max(0.0, z - 0.5); });
    CHECK(op.t_vectors(0, j) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("gram and sigma-hat share their trace") {
  const FeatureBank bank = sample_bank(64, 2.0, 33);
  const QuadratureRule quad = QuadratureRule::gauss_hermite(128);
  const FeatureOperator op = build_operator(bank, 8, 0.0, quad);
  CHECK(op.gram.trace() == doctest::Approx(trace_sigma_hat(bank)).epsilon(1e-12));
}

TEST_CASE("closed-form gram matches monte carlo entrywise") {
  const int N = 8, draws = 1000000;
  const FeatureBank bank = sample_bank(N, 2.0, 55);
  const QuadratureRule quad = QuadratureRule::gauss_hermite(128);
  const FeatureOperator op = build_operator(bank, 4, 0.0, quad);
  Rng rng(77);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(N, N), sum_sq = Eigen::MatrixXd::Zero(N, N);
  for (int t = 0; t < draws; ++t) {
    const double z = rng.normal();
    Eigen::VectorXd f(N);
    for (int i = 0; i < N; ++i) {
      f[i] = std::max(0.0, bank.signs[i] * z - bank.biases[i]);
    }
    sum += f * f.transpose();
    sum_sq += (f * f.transpose()).cwiseAbs2();
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double mean = sum(i, j) / draws;
      const double se = std::sqrt(
          std::max(0.0, sum_sq(i, j) / draws - mean * mean) / draws);
      CHECK(std::abs(op.gram(i, j) * N - mean) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("smoothed-activation operator matches the naive quadrature gram") {
  const FeatureBank bank = sample_bank(24, 2.0, 9, {Activation::smoothed_relu, 0.9});
  const QuadratureRule quad = QuadratureRule::gauss_hermite(128);
  const FeatureOperator op = build_operator(bank, 12, 0.1, quad);
  const Eigen::MatrixXd naive = ref::gram_quadrature(bank, quad);
  CHECK((op.gram - naive).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("regularized projection basics") {
  const FeatureBank bank = sample_bank(64, 2.0, 12);
  const QuadratureRule quad = QuadratureRule::gauss_hermite(128);
  const FeatureOperator op = build_operator(bank, 16, 0.05, quad);

  const ProjectionResult zero = regularized_projection(op, HermiteSeries::zeros(16));
  CHECK(zero.c.norm() == 0.0);
  CHECK(zero.residual_sq == doctest::Approx(0.0).epsilon(1e-14));

  HermiteSeries f = HermiteSeries::basis(2, 16);
  const FeatureOperator op_huge = build_operator(bank, 16, 1e9, quad);
  const ProjectionResult washed = regularized_projection(op_huge, f);
  CHECK(washed.c.norm() <= 1e-6);
  CHECK(washed.residual_sq == doctest::Approx(f.norm_sq()).epsilon(1e-4));

  const FeatureOperator op0 = build_operator(bank, 16, 0.0, quad);
  CHECK_THROWS_AS(regularized_projection(op0, f), std::invalid_argument);
}

TEST_CASE("projection residual is a contraction and monotone in lambda") {
  const FeatureBank bank = sample_bank(128, 2.0, 30);
  const QuadratureRule quad = QuadratureRule::gauss_hermite(192);
  Rng rng(8);
  HermiteSeries f(rng.normal_vector(17));
  double prev = -1.0;
  for (double lam : {0.3, 0.1, 0.03, 0.01}) {
    const FeatureOperator op = build_operator(bank, 16, lam, quad);
    const ProjectionResult pr = regularized_projection(op, f);
    CHECK(pr.residual_sq <= f.norm_sq() + 1e-12);
    if (prev >= 0.0) CHECK(pr.residual_sq <= prev + 1e-12);
    prev = pr.residual_sq;
  }
}

TEST_CASE("centered relu projection satisfies the rate bound") {
  HermiteSeries relu = relu_coeffs_closed_form(64);
  relu.coeffs[0] = 0.0;
  relu.coeffs /= std::sqrt(0.5 - 1.0 / (2.0 * M_PI));
  const double tau = 2.0, lam = 0.05;
  const FeatureBank bank = sample_bank(256, tau, 61);
  const QuadratureRule quad = QuadratureRule::gauss_hermite(192);
  const FeatureOperator op = build_operator(bank, 64, lam, quad);
  const ProjectionResult pr = regularized_projection(op, relu);
  CHECK(pr.residual_sq <= 4.0 * (2.0 + tau * tau) * std::pow(lam, 2.0 / 3.0));
}

TEST_CASE("rkhs norm bound") {
  CHECK(rkhs_norm_bound(HermiteSeries::zeros(8), [](double) { return 0.0; }, 2.0) ==
        doctest::Approx(0.0));

  // compactly supported C^2 bump f = (1 - t^2)^3 on |t| <= 1
  const auto bump = [](double t) {
    const double s = 1.0 - t * t;
    return std::abs(t) < 1.0 ? s * s * s : 0.0;
  };
  const auto bump_dd = [](double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    const double s = 1.0 - t * t;
    return -6.0 * s * s + 24.0 * t * t * s;
  };
  const QuadratureRule rule = QuadratureRule::composite({-1.0, 1.0});
  const HermiteSeries f = project_to_series(bump, 48, rule);
  const double b64 = rkhs_norm_bound(f, bump_dd, 2.0, 8.0, 64);
  const double b128 = rkhs_norm_bound(f, bump_dd, 2.0, 8.0, 128);
  CHECK(b64 > 0.0);
  CHECK(std::abs(b64 - b128) / b64 <= 1e-4);

  // bound dominates the norm of any explicit feature representation
  const FeatureBank bank = sample_bank(512, 2.0, 71);
  const QuadratureRule quad = QuadratureRule::gauss_hermite(192);
  const FeatureOperator op = build_operator(bank, 48, 0.01, quad);
  const HermiteSeries fb = project_to_series(bump, 48, rule);
  const ProjectionResult pr = regularized_projection(op, fb);
  CHECK(b64 >= pr.c.squaredNorm());

  // a constant second derivative makes the weighted integral diverge, which
  // must be reported rather than summed
  CHECK_THROWS_AS(
      rkhs_norm_bound(HermiteSeries::basis(2, 8),
                      [](double) { return 2.0 / std::sqrt(2.0); }, 2.0),
      std::runtime_error);

  // weighted integrand that grows must be reported
  CHECK_THROWS_AS(
      rkhs_norm_bound(HermiteSeries::basis(2, 8), [](double t) { return std::exp(t * t); },
                      1.5),
      std::runtime_error);
}

TEST_CASE("smoothed relu closed form") {
  CHECK(smoothed_relu(1.0, 0.7) == doctest::Approx(0.7));
  CHECK(smoothed_relu(1.0, -0.7) == 0.0);
  for (double t : {-5.0, -0.3, 0.0, 1.2, 6.0}) {
    CHECK(smoothed_relu(0.0, t) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
  }
  CHECK_THROWS_AS(smoothed_relu(-0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(smoothed_relu(1.1, 0.0), std::invalid_argument);

  // quadrature cross-check of U_rho relu with the kink on a panel edge
  for (double rho : {0.3, 0.9}) {
    for (double t : {-1.5, 0.0, 0.8}) {
      const double s = std::sqrt(1.0 - rho * rho);
      const QuadratureRule rule = QuadratureRule::composite({-rho * t / s});
      const double direct =
          rule.integrate([&](double u) { return std::max(0.0, rho * t + s * u); });
      CHECK(smoothed_relu(rho, t) == doctest::Approx(direct).epsilon(1e-12));
    }
  }

  // second-derivative bound
  for (double rho : {0.5, 0.9, 0.99}) {
    double sup = 0.0;
    for (double t = -6.0; t <= 6.0; t += 0.01) {
      sup = std::max(sup, std::abs(gauss::smoothed_relu_second(rho, t)));
    }
    CHECK(sup <= 4.0 * rho * rho / std::sqrt(1.0 - rho * rho));
  }
}

TEST_CASE("trace closed form matches quadrature") {
  const FeatureBank bank = sample_bank(64, 2.0, 3);
  std::vector<double> knots;  // kinks sit at sign * bias
  for (int i = 0; i < bank.size(); ++i) knots.push_back(bank.signs[i] * bank.biases[i]);
  const QuadratureRule rule = QuadratureRule::composite(knots);
  double acc = 0.0;
  for (int i = 0; i < bank.size(); ++i) {
    acc += rule.integrate([&](double z) {
      const double f = std::max(0.0, bank.signs[i] * z - bank.biases[i]);
      return f * f;
    });
  }
  CHECK(trace_sigma_hat(bank) == doctest::Approx(acc / bank.size()).epsilon(1e-12));
}

TEST_CASE("degrees of freedom stay below a stable C / lambda") {
  // estimate sup_b <P phi_b, (P Sigma P + lambda)^{-1} P phi_b> on a finite basis
  const int J = 32;
  const QuadratureRule b_rule = QuadratureRule::gauss_hermite(96);
  std::vector<double> row(J + 1);

  // Sigma on the Hermite basis: Sigma_{jk} = E_{b,eps} <h_j, phi> <h_k, phi>
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(J + 1, J + 1);
  std::vector<Eigen::VectorXd> feats;  // per (b, eps) feature coefficient vectors
  std::vector<double> weights;
  for (int q = 0; q < b_rule.node_count(); ++q) {
    const double b = 2.0 * b_rule.nodes[q];
    for (double eps : {-1.0, 1.0}) {
      FeatureBank one;
      one.biases = Eigen::VectorXd::Constant(1, b);
      one.signs = Eigen::VectorXd::Constant(1, eps);
      one.tau = 2.0;
      const FeatureOperator op =
          build_operator(one, J, 0.0, QuadratureRule::gauss_hermite(128));
      Eigen::VectorXd v = op.t_vectors.row(0);  // <h_j, phi> for N = 1
      feats.push_back(v);
      weights.push_back(0.5 * b_rule.weights[q]);
      sigma += 0.5 * b_rule.weights[q] * v * v.transpose();
    }
  }
  // P zeroes the constant component
  auto dof_max = [&](double lam) {
    Eigen::MatrixXd m = sigma;
    m.row(0).setZero();
    m.col(0).setZero();
    m.diagonal().array() += lam;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    double worst = 0.0;
    for (const auto& v : feats) {
      Eigen::VectorXd pv = v;
      pv[0] = 0.0;
      worst = std::max(worst, pv.dot(llt.solve(pv)));
    }
    return worst;
  };
  const double c_fit = 0.1 * dof_max(0.1);
  for (double lam : {0.1, 0.03, 0.01}) {
    CHECK(dof_max(lam) <= 1.5 * c_fit / lam);
  }
}

TEST_CASE("bank json round trip") {
  const FeatureBank bank = sample_bank(32, 2.5, 99, {Activation::smoothed_relu, 0.7});
  const FeatureBank back = bank_from_json(to_json(bank));
  CHECK(back.biases == bank.biases);
  CHECK(back.signs == bank.signs);
  CHECK(back.tau == bank.tau);
  const FeatureBank explicit_back = bank_from_json(to_json(bank, true));
  CHECK(explicit_back.biases == bank.biases);
}

TEST_CASE("operator cache round trip") {
  const FeatureBank bank = sample_bank(16, 2.0, 123);
  const QuadratureRule quad = QuadratureRule::gauss_hermite(96);
  const FeatureOperator op = build_operator(bank, 8, 0.01, quad);
  const std::string path = "/tmp/sindex_op_cache_test.bin";
  save_operator(path, op);
  FeatureOperator loaded;
  REQUIRE(load_operator(path, 0.01, loaded));
  CHECK((loaded.gram - op.gram).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.t_vectors - op.t_vectors).cwiseAbs().maxCoeff() == 0.0);
  CHECK(operator_cache_key(bank, 8, 0.01, quad) !=
        operator_cache_key(bank, 9, 0.01, quad));
}
