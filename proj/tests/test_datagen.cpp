#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sindex/datagen.hpp"
#include "sindex/gaussian.hpp"

using namespace sindex;

TEST_CASE("hermite monomial teacher") {
  const TeacherSpec t = make_teacher(LinkSpec::monomial(3), 8, 1, 0.0, 32, false, true);
  CHECK(t.info_exponent == 3);
  for (int j = 0; j <= 32; ++j) {
    CHECK(t.series.coeffs[j] == doctest::Approx(j == 3 ? 1.0 : 0.0).epsilon(1e-12));
  }
  CHECK(std::abs(t.theta_star.norm() - 1.0) <= 1e-12);
}

TEST_CASE("stripped teachers lose their low-order components") {
  const TeacherSpec t2 = make_teacher(LinkSpec::stripped(LinkSpec::default_teacher(), 2),
                                      6, 2, 0.0, 64, false, true);
  CHECK(t2.series.coeffs[0] == 0.0);
  CHECK(t2.series.coeffs[1] == 0.0);
  CHECK(std::abs(t2.series.coeffs[2]) > 1e-3);
  CHECK(t2.info_exponent == 2);

  const TeacherSpec t3 = make_teacher(LinkSpec::stripped(LinkSpec::default_teacher(), 3),
                                      6, 2, 0.0, 64, false, true);
  CHECK(t3.info_exponent == 3);

  // strip = 1 is just the centered, normalized link
  const TeacherSpec t1 = make_teacher(LinkSpec::default_teacher(), 6, 2, 0.0, 64, false, true);
  CHECK(t1.series.coeffs[0] == 0.0);
  CHECK(t1.series.norm_sq() == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(t1.info_exponent == 1);
}

TEST_CASE("teacher series agrees with the exact callable") {
  // the series evaluated at a point approximates eval() up to truncation
  const TeacherSpec t = make_teacher(LinkSpec::default_teacher(), 6, 3, 0.0, 64, false, true);
  for (double z : {-1.5, -0.4, 0.3, 1.1}) {
    CHECK(std::abs(t.series.eval(z) - t.eval(z)) <= 0.06);
  }
  // the callable itself has exactly unit gamma-norm and zero mean
  const QuadratureRule rule = QuadratureRule::composite(t.link.knots);
  const double nrm = rule.integrate([&](double z) { return t.eval(z) * t.eval(z); });
  const double mean = rule.integrate([&](double z) { return t.eval(z); });
  CHECK(nrm == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("degenerate links are rejected") {
  LinkSpec flat;
  flat.kind = LinkKind::custom_series;
  flat.custom = HermiteSeries::zeros(8);
  flat.custom.coeffs[0] = 3.0;  // constant function, zero after centering
  CHECK_THROWS_AS(make_teacher(flat, 4, 1, 0.0, 16, false, true), std::runtime_error);
  CHECK_THROWS_AS(make_teacher(LinkSpec::default_teacher(), 1, 1, 0.0, 16, false, true),
                  std::invalid_argument);
}

TEST_CASE("identity-like teacher gives exact labels at sigma = 0") {
  const TeacherSpec t = make_teacher(LinkSpec::monomial(1), 5, 7, 0.0, 16, false, true);
  const Dataset data = sample_dataset(t, 64, 5, 7);
  for (int i = 0; i < data.n(); ++i) {
    CHECK(data.ys[i] ==
          doctest::Approx(data.xs.row(i).dot(t.theta_star)).epsilon(1e-14));
  }
}

TEST_CASE("label moments match the unit-normalized teacher") {
  const int n = 1000000, d = 4;
  const double sigma = 0.1;
  const TeacherSpec t =
      make_teacher(LinkSpec::default_teacher(), d, 9, sigma, 64, false, true);
  const Dataset data = sample_dataset(t, n, d, 9);
  const double mean = data.ys.mean();
  const double total_var = 1.0 + sigma * sigma;
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(total_var / n));
  const double var = (data.ys.array() - mean).square().mean();
  CHECK(var == doctest::Approx(total_var).epsilon(0.02));
}

TEST_CASE("coordinates and the teacher projection pass a KS test") {
  const int n = 10000, d = 3;
  const TeacherSpec t = make_teacher(LinkSpec::default_teacher(), d, 11, 0.0, 64, false, true);
  const Dataset data = sample_dataset(t, n, d, 11);
  const double critical = 1.628 / std::sqrt(double(n));  // 1% level
  auto ks = [&](Eigen::VectorXd v) {
    std::sort(v.data(), v.data() + v.size());
    double worst = 0.0;
    for (int i = 0; i < v.size(); ++i) {
      const double f = gauss::cdf(v[i]);
      worst = std::max(worst, std::abs(f - (i + 1.0) / v.size()));
      worst = std::max(worst, std::abs(f - double(i) / v.size()));
    }
    return worst;
  };
  for (int j = 0; j < d; ++j) CHECK(ks(data.xs.col(j)) <= critical);
  CHECK(ks(data.xs * t.theta_star) <= critical);
}

TEST_CASE("datasets are reproducible and stream tags separate draws") {
  const TeacherSpec t = make_teacher(LinkSpec::default_teacher(), 4, 13, 0.01, 64, false, true);
  const Dataset a = sample_dataset(t, 50, 4, 13, "train");
  const Dataset b = sample_dataset(t, 50, 4, 13, "train");
  CHECK(a.xs == b.xs);
  CHECK(a.ys == b.ys);
  const Dataset c = sample_dataset(t, 50, 4, 13, "finetune");
  CHECK((a.xs - c.xs).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("dataset io round trips") {
  const TeacherSpec t = make_teacher(LinkSpec::default_teacher(), 3, 15, 0.01, 64, false, true);
  const Dataset data = sample_dataset(t, 20, 3, 15);
  write_dataset_csv(data, "/tmp/sindex_data_test.csv");
  save_dataset(data, "/tmp/sindex_data_test.bin");
  Dataset back;
  REQUIRE(load_dataset("/tmp/sindex_data_test.bin", back));
  CHECK(back.xs == data.xs);
  CHECK(back.ys == data.ys);
  CHECK(back.teacher_hash == data.teacher_hash);
}
