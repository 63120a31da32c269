#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sindex/datagen.hpp"
#include "sindex/features.hpp"

namespace sindex {

// Analytic population-loss oracle in (c, m).  Everything is coefficient-level:
// g_m and gbar_m live as reweighted copies of the teacher series.
struct PopulationOracle {
  HermiteSeries teacher_series;  // centered, unit norm
  FeatureOperator op;
  double sigma_sq = 0.0;
  double lambda = 0.0;
};

PopulationOracle make_oracle(HermiteSeries teacher_series, FeatureOperator op,
                             double sigma_sq);

// L(c, m) = ||f||^2 + c^T Q_lambda c - 2 <c, sum_j a_j m^j T_j> + sigma^2
double population_loss(const PopulationOracle& oracle, const Eigen::VectorXd& c, double m);

struct ProjectedLoss {
  double value;
  Eigen::VectorXd c_opt;
};
// min_c L(c, m) and its argmin c = Q_lambda^{-1} sum_j a_j m^j T_j.
ProjectedLoss projected_population_loss(const PopulationOracle& oracle, double m);

// Right-hand side of the critical-point equation,
//   -sum_j a_j^2 j m^{2j-1} + <(I - P_lambda) g_m, gbar_m>,
// which equals (1/2) dL̄/dm; zeros locate critical latitudes besides m = +-1.
double critical_residual(const PopulationOracle& oracle, double m);

struct PopulationGrads {
  Eigen::VectorXd grad_c;  // 2 (Q_lambda c - sum_j a_j m^j T_j)
  double grad_m_coef;      // scalar multiplying theta* in grad_theta L
};
// Spherical gradient magnitude is |grad_m_coef| * sqrt(1 - m^2).
PopulationGrads population_grads(const PopulationOracle& oracle, const Eigen::VectorXd& c,
                                 double m);

enum class CriticalClass { equator, pole, interior, theory_violation };

// Gradient norms above eps -> interior; otherwise classified by the
// near-criticality thresholds at s~ = s.  A near-critical point violating both
// thresholds is reported, never silently binned.
CriticalClass classify_near_critical(const PopulationOracle& oracle,
                                     const Eigen::VectorXd& c, double m, double eps);

struct LandscapeScanRow {
  double m;
  double loss;       // projected population loss
  double residual;   // critical-point residual
  double grad_mag;   // spherical gradient magnitude at c_opt(m)
};
std::vector<LandscapeScanRow> landscape_scan(const PopulationOracle& oracle, int gridment);
void write_scan_csv(const std::vector<LandscapeScanRow>& rows, const std::string& path);

struct DeviationProbe {
  std::vector<int> ns;
  std::vector<double> max_dev_theta;  // Euclidean theta-block deviation
  std::vector<double> max_dev_c;
  double slope_theta;  // log-log regression slope of max deviation vs n
  double slope_c;
};

// Max over `sample_count` random (c, theta) with ||c|| <= r of
// ||grad L_n - grad L|| for both blocks, across the given n grid.
DeviationProbe deviation_probe(const FeatureBank& bank, const TeacherSpec& teacher,
                               const std::vector<int>& ns, int sample_count, double r,
                               std::uint64_t seed);

}  // namespace sindex
