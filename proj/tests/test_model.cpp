#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sindex/model.hpp"
#include "sindex/parallel.hpp"
#include "sindex/reference.hpp"
#include "sindex/rng.hpp"

using namespace sindex;

namespace {

Dataset make_data(const TeacherSpec& teacher, int n, int d, std::uint64_t seed) {
  return sample_dataset(teacher, n, d, seed, "train");
}

ModelState random_state(int d, int N, std::uint64_t seed, double c_scale = 0.3) {
  Rng rng(seed);
  ModelState s;
  s.theta = rng.sphere(d);
  s.c = rng.normal_vector(N) * (c_scale / std::sqrt(double(N)));
  return s;
}

}  // namespace

TEST_CASE("forward basics") {
  FeatureBank bank;
  bank.biases = Eigen::VectorXd::Zero(1);
  bank.signs = Eigen::VectorXd::Ones(1);
  bank.tau = 2.0;
  ModelState state;
  state.c = Eigen::VectorXd::Ones(1);
  state.theta = Eigen::VectorXd::Zero(4);
  state.theta[0] = 1.0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x[0] = 2.0;
  x[2] = -3.0;
  CHECK(forward(state, bank, x) == doctest::Approx(2.0));

  state.c.setZero();
  CHECK(forward(state, bank, x) == 0.0);
}

TEST_CASE("forward depends on x only through the projection") {
  const int d = 6, N = 32;
  const FeatureBank bank = sample_bank(N, 2.0, 2);
  ModelState state = random_state(d, N, 3);
  Rng rng(4);
  const Eigen::VectorXd x = rng.normal_vector(d);
  // replace the orthogonal component of x
  Eigen::VectorXd perp = rng.normal_vector(d);
  perp -= perp.dot(state.theta) * state.theta;
  const Eigen::VectorXd x2 =
      x.dot(state.theta) * state.theta + 5.0 * perp;
  CHECK(forward(state, bank, x) ==
        doctest::Approx(forward(state, bank,
                                x.dot(state.theta) * state.theta +
                                    (x - x.dot(state.theta) * state.theta)))
            .epsilon(1e-15));
  CHECK(forward(state, bank, x2) ==
        doctest::Approx(forward(state, bank, x.dot(state.theta) * state.theta))
            .epsilon(1e-12));
}

TEST_CASE("empirical loss basics") {
  const int d = 5, N = 24, n = 128;
  const TeacherSpec teacher =
      make_teacher(LinkSpec::default_teacher(), d, 1, 0.01, 64, false, true);
  const FeatureBank bank = sample_bank(N, 2.0, 1);
  const Dataset data = make_data(teacher, n, d, 1);

  ModelState zero = random_state(d, N, 5);
  zero.c.setZero();
  CHECK(empirical_loss(zero, bank, data, 0.0) ==
        doctest::Approx(data.ys.squaredNorm() / n).epsilon(1e-14));

  // perfect fit: labels generated by the state itself
  ModelState state = random_state(d, N, 6);
  Dataset fit = data;
  for (int i = 0; i < n; ++i) fit.ys[i] = forward(state, bank, fit.xs.row(i));
  CHECK(empirical_loss(state, bank, fit, 0.0) <= 1e-24);

  // loss is linear in lambda with slope ||c||^2
  const double l1 = empirical_loss(state, bank, data, 0.05);
  const double l2 = empirical_loss(state, bank, data, 0.10);
  CHECK(l2 - l1 == doctest::Approx(0.05 * state.c.squaredNorm()).epsilon(1e-12));

  Dataset empty = data;
  empty.xs.resize(0, d);
  empty.ys.resize(0);
  CHECK_THROWS(empirical_loss(state, bank, empty, 0.0));
}

TEST_CASE("gradients vanish at zero residual") {
  const int d = 5, N = 16, n = 64;
  const TeacherSpec teacher =
      make_teacher(LinkSpec::default_teacher(), d, 2, 0.0, 64, false, true);
  const FeatureBank bank = sample_bank(N, 2.0, 2);
  ModelState state = random_state(d, N, 7);
  Dataset fit = make_data(teacher, n, d, 2);
  for (int i = 0; i < n; ++i) fit.ys[i] = forward(state, bank, fit.xs.row(i));
  CHECK(grad_c(state, bank, fit, 0.0).norm() <= 1e-13);

  ModelState zero_c = state;
  zero_c.c.setZero();
  CHECK(grad_theta_spherical(zero_c, bank, fit, 0.0).norm() == 0.0);
}

TEST_CASE("spherical gradient is tangent") {
  const int d = 8, N = 40, n = 256;
  const TeacherSpec teacher =
      make_teacher(LinkSpec::default_teacher(), d, 3, 1e-3, 64, false, true);
  const FeatureBank bank = sample_bank(N, 2.0, 3);
  const Dataset data = make_data(teacher, n, d, 3);
  const ModelState state = random_state(d, N, 8);
  const Eigen::VectorXd g = grad_theta_spherical(state, bank, data, 1e-3);
  CHECK(std::abs(g.dot(state.theta)) <= 1e-12);

  ModelState bad = state;
  bad.theta *= 1.01;
  CHECK_THROWS_AS(grad_theta_spherical(bad, bank, data, 1e-3), std::invalid_argument);
}

TEST_CASE("finite differences confirm both gradients") {
  const int d = 6, N = 12, n = 48;
  const double lambda = 0.02, h = 1e-5;
  for (auto act : {ActivationSpec{Activation::smoothed_relu, 0.9},
                   ActivationSpec{Activation::relu, 1.0}}) {
    int done = 0;
    std::uint64_t seed = act.kind == Activation::relu ? 600 : 300;
    while (done < 5) {
      ++seed;
      const FeatureBank bank = sample_bank(N, 2.0, seed, act);
      const TeacherSpec teacher =
          make_teacher(LinkSpec::default_teacher(), d, seed, 1e-3, 64, false, true);
      const Dataset data = make_data(teacher, n, d, seed);
      const ModelState state = random_state(d, N, seed);
      if (act.kind == Activation::relu && !kink_free(state, bank, data)) continue;
      ++done;

      const Eigen::VectorXd gc = grad_c(state, bank, data, lambda);
      for (int k = 0; k < N; k += 3) {
        ModelState p = state, m = state;
        p.c[k] += h;
        m.c[k] -= h;
        const double fd = (empirical_loss(p, bank, data, lambda) -
                           empirical_loss(m, bank, data, lambda)) /
                          (2 * h);
        CHECK(gc[k] == doctest::Approx(fd).epsilon(1e-5));
      }

      const Eigen::VectorXd gt = grad_theta_spherical(state, bank, data, lambda);
      Rng rng(seed + 1);
      for (int rep = 0; rep < 3; ++rep) {
        Eigen::VectorXd v = rng.normal_vector(d);
        v -= v.dot(state.theta) * state.theta;
        v.normalize();
        ModelState p = state, m = state;
        p.theta = (state.theta + h * v).normalized();
        m.theta = (state.theta - h * v).normalized();
        const double fd = (empirical_loss(p, bank, data, lambda) -
                           empirical_loss(m, bank, data, lambda)) /
                          (2 * h);
        CHECK(gt.dot(v) == doctest::Approx(fd).epsilon(2e-5));
      }
    }
  }
}

TEST_CASE("rotation equivariance") {
  const int d = 7, N = 32, n = 200;
  const TeacherSpec teacher =
      make_teacher(LinkSpec::default_teacher(), d, 4, 1e-3, 64, false, true);
  const FeatureBank bank = sample_bank(N, 2.0, 4);
  Dataset data = make_data(teacher, n, d, 4);
  const ModelState state = random_state(d, N, 9);

  // random orthogonal map from QR
  Rng rng(10);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();

  Dataset rotated = data;
  rotated.xs = data.xs * q;  // x_i -> Q^T x_i per row
  ModelState rstate = state;
  rstate.theta = q.transpose() * state.theta;

  const double l0 = empirical_loss(state, bank, data, 1e-3);
  const double l1 = empirical_loss(rstate, bank, rotated, 1e-3);
  CHECK(l0 == doctest::Approx(l1).epsilon(1e-10));
  CHECK(grad_c(state, bank, data, 1e-3).norm() ==
        doctest::Approx(grad_c(rstate, bank, rotated, 1e-3).norm()).epsilon(1e-10));
  CHECK(grad_theta_spherical(state, bank, data, 1e-3).norm() ==
        doctest::Approx(grad_theta_spherical(rstate, bank, rotated, 1e-3).norm())
            .epsilon(1e-10));
}

TEST_CASE("parallel kernels match the serial reference") {
  const int d = 9, N = 48;
  const TeacherSpec teacher =
      make_teacher(LinkSpec::default_teacher(), d, 6, 1e-3, 64, false, true);
  for (auto act : {ActivationSpec{Activation::relu, 1.0},
                   ActivationSpec{Activation::smoothed_relu, 0.8}}) {
    const FeatureBank bank = sample_bank(N, 2.0, 6, act);
    for (int n : {1, 63, 4096, 4097, 9001}) {
      const Dataset data = make_data(teacher, n, d, 6);
      const ModelState state = random_state(d, N, 11);
      CHECK(empirical_loss(state, bank, data, 0.01) ==
            doctest::Approx(ref::empirical_loss(state, bank, data, 0.01))
                .epsilon(1e-12));
      const auto lg = loss_and_grads(state, bank, data, 0.01);
      CHECK((lg.grad_c - ref::grad_c(state, bank, data, 0.01)).cwiseAbs().maxCoeff() <=
            1e-12);
      CHECK((lg.grad_theta_sph - ref::grad_theta_spherical(state, bank, data, 0.01))
                .cwiseAbs()
                .maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("block reduction is identical to an explicit pairwise tree") {
  const std::int64_t n = 100001;
  std::vector<double> xs(n);
  Rng rng(13);
  for (auto& x : xs) x = rng.normal();
  const double got = par::block_sum(n, [&](std::int64_t i) { return xs[i]; });
  // reproduce the fixed block/tree structure serially
  const std::int64_t block = par::kBlock;
  const std::int64_t nb = (n + block - 1) / block;
  std::vector<double> partial(nb, 0.0);
  for (std::int64_t k = 0; k < nb; ++k) {
    for (std::int64_t i = k * block; i < std::min(n, (k + 1) * block); ++i) {
      partial[k] += xs[i];
    }
  }
  for (std::int64_t stride = 1; stride < nb; stride *= 2) {
    for (std::int64_t k = 0; k + stride < nb; k += 2 * stride) {
      partial[k] += partial[k + stride];
    }
  }
  CHECK(got == partial[0]);  // bitwise
  // repeated evaluation is bit-stable
  CHECK(got == par::block_sum(n, [&](std::int64_t i) { return xs[i]; }));
}

TEST_CASE("kink predicate") {
  FeatureBank bank;
  bank.biases = Eigen::VectorXd::Zero(1);
  bank.signs = Eigen::VectorXd::Ones(1);
  bank.tau = 2.0;
  ModelState state;
  state.c = Eigen::VectorXd::Ones(1);
  state.theta = Eigen::VectorXd::Zero(2);
  state.theta[0] = 1.0;
  Dataset data;
  data.xs.resize(1, 2);
  data.ys.resize(1);
  data.xs << 5e-5, 0.3;
  data.ys << 0.0;
  CHECK_FALSE(kink_free(state, bank, data, 1e-4));
  data.xs(0, 0) = 0.5;
  CHECK(kink_free(state, bank, data, 1e-4));
}

TEST_CASE("model state json round trip") {
  ModelState s = random_state(4, 8, 21);
  const ModelState back = model_state_from_json(to_json(s));
  CHECK((back.c - s.c).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.theta - s.theta).cwiseAbs().maxCoeff() == 0.0);
}
