#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sindex/hermite.hpp"

namespace sindex {

enum class LinkKind { piecewise_linear, hermite_monomial, relu, custom_series };

// Univariate link recipe: a base shape plus how many low-order Hermite
// components to strip (strip = 1 centers and normalizes only).
struct LinkSpec {
  LinkKind kind = LinkKind::piecewise_linear;
  std::vector<double> knots;   // piecewise_linear: breakpoints, ascending
  std::vector<double> values;  // piecewise_linear: values at the breakpoints
  int monomial_order = 1;      // hermite_monomial
  HermiteSeries custom;        // custom_series
  int strip = 1;

  // Compactly supported kinked profile on [-2, 2]; the default experiment
  // teacher.  Asymmetric so that the first three Hermite coefficients are all
  // well away from zero.
  static LinkSpec default_teacher();
  static LinkSpec monomial(int j);
  static LinkSpec relu_link();
  static LinkSpec stripped(LinkSpec base, int s);

  double eval_raw(double z) const;  // the un-centered base link
};

struct TeacherSpec {
  LinkSpec link;
  HermiteSeries series;  // stripped, unit gamma-norm, truncated at J
  Eigen::VectorXd theta_star;
  double sigma = 0.0;
  int info_exponent = 1;
  double tail_mass = 0.0;  // estimated coefficient mass above truncation
  std::uint64_t hash = 0;

  // Exact link evaluation: raw link minus its exact low-order Hermite part,
  // scaled to unit norm.  Not the truncated series.
  double eval(double z) const;

  double raw_norm_sq = 0.0;
  Eigen::VectorXd strip_coeffs;  // exact alpha_0..alpha_{s-1} of the raw link
  double tail_norm = 1.0;
};

// Projects the link (piecewise quadrature with panel edges on the kinks),
// strips, normalizes, and draws theta_star from the seeded uniform law on the
// sphere (or pins it to e_1 for debugging).  Warns on stderr when the
// estimated truncation tail mass exceeds 1e-6.
TeacherSpec make_teacher(const LinkSpec& link, int d, std::uint64_t seed, double sigma,
                         int J = 64, bool theta_star_e1 = false, bool quiet = false);

struct Dataset {
  Eigen::MatrixXd xs;  // n x d, one sample per row
  Eigen::VectorXd ys;
  std::uint64_t seed = 0;
  std::uint64_t teacher_hash = 0;
  std::string stream_tag = "train";

  int n() const { return static_cast<int>(xs.rows()); }
  int dim() const { return static_cast<int>(xs.cols()); }
};

// y_i = f(<theta_star, x_i>) + sigma xi_i with x ~ N(0, I_d).  The stream tag
// separates train / finetune / test draws for the same user seed.
Dataset sample_dataset(const TeacherSpec& teacher, int n, int d, std::uint64_t seed,
                       std::string_view stream_tag = "train");

void write_dataset_csv(const Dataset& data, const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);
bool load_dataset(const std::string& path, Dataset& data);

}  // namespace sindex
