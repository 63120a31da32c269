#include "sindex/landscape.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "sindex/model.hpp"
#include "sindex/parallel.hpp"
#include "sindex/rng.hpp"

namespace sindex {

namespace {

void check_m(double m) {
  if (std::abs(m) > 1.0) throw std::invalid_argument("|m| must be <= 1");
}

// coefficients of g_m: a_j m^j
Eigen::VectorXd gm_coeffs(const HermiteSeries& s, double m) {
  Eigen::VectorXd out(s.coeffs.size());
  double p = 1.0;
  for (int j = 0; j < s.coeffs.size(); ++j) {
    out[j] = s.coeffs[j] * p;
    p *= m;
  }
  return out;
}

// coefficients of gbar_m: a_j j m^{j-1}
Eigen::VectorXd gbar_coeffs(const HermiteSeries& s, double m) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.coeffs.size());
  double p = 1.0;  // m^{j-1} starting at j = 1
  for (int j = 1; j < s.coeffs.size(); ++j) {
    out[j] = s.coeffs[j] * j * p;
    p *= m;
  }
  return out;
}

// sum_j a_j^2 j m^{2j-1}
double gm_gbar_inner(const HermiteSeries& s, double m) {
  double acc = 0.0, p = m;  // m^{2j-1} at j = 1
  for (int j = 1; j < s.coeffs.size(); ++j) {
    acc += s.coeffs[j] * s.coeffs[j] * j * p;
    p *= m * m;
  }
  return acc;
}

}  // namespace

PopulationOracle make_oracle(HermiteSeries teacher_series, FeatureOperator op,
                             double sigma_sq) {
  if (teacher_series.truncation_order() != op.order()) {
    throw std::invalid_argument("teacher truncation does not match operator order");
  }
  if (sigma_sq < 0.0) throw std::invalid_argument("noise variance must be >= 0");
  PopulationOracle oracle;
  oracle.lambda = op.lambda;
  oracle.teacher_series = std::move(teacher_series);
  oracle.op = std::move(op);
  oracle.sigma_sq = sigma_sq;
  return oracle;
}

double population_loss(const PopulationOracle& oracle, const Eigen::VectorXd& c, double m) {
  check_m(m);
  const Eigen::VectorXd v = oracle.op.t_vectors * gm_coeffs(oracle.teacher_series, m);
  const double quad = c.dot(oracle.op.gram * c) + oracle.lambda * c.squaredNorm();
  return oracle.teacher_series.norm_sq() + quad - 2.0 * c.dot(v) + oracle.sigma_sq;
}

ProjectedLoss projected_population_loss(const PopulationOracle& oracle, double m) {
  check_m(m);
  if (oracle.lambda <= 0.0) {
    throw std::invalid_argument("projected loss requires lambda > 0");
  }
  const Eigen::VectorXd v = oracle.op.t_vectors * gm_coeffs(oracle.teacher_series, m);
  ProjectedLoss out;
  out.c_opt = oracle.op.solve_regularized(v);
  out.value = oracle.teacher_series.norm_sq() + oracle.sigma_sq - v.dot(out.c_opt);
  return out;
}

double critical_residual(const PopulationOracle& oracle, double m) {
  check_m(m);
  const double direct = gm_gbar_inner(oracle.teacher_series, m);  // <g_m, gbar_m>
  const Eigen::VectorXd v = oracle.op.t_vectors * gm_coeffs(oracle.teacher_series, m);
  const Eigen::VectorXd vbar = oracle.op.t_vectors * gbar_coeffs(oracle.teacher_series, m);
  const Eigen::VectorXd c_opt = oracle.op.solve_regularized(v);
  const double projected_defect = direct - c_opt.dot(vbar);  // <(I-P)g_m, gbar_m>
  return -direct + projected_defect;
}

PopulationGrads population_grads(const PopulationOracle& oracle, const Eigen::VectorXd& c,
                                 double m) {
  check_m(m);
  const Eigen::VectorXd v = oracle.op.t_vectors * gm_coeffs(oracle.teacher_series, m);
  PopulationGrads out;
  out.grad_c = 2.0 * (oracle.op.gram * c + oracle.lambda * c - v);
  const Eigen::VectorXd vbar = oracle.op.t_vectors * gbar_coeffs(oracle.teacher_series, m);
  out.grad_m_coef = -2.0 * c.dot(vbar);
  return out;
}

CriticalClass classify_near_critical(const PopulationOracle& oracle,
                                     const Eigen::VectorXd& c, double m, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  check_m(m);
  const PopulationGrads g = population_grads(oracle, c, m);
  const double sph = std::abs(g.grad_m_coef) * std::sqrt(std::max(0.0, 1.0 - m * m));
  if (g.grad_c.norm() > eps || sph > eps) return CriticalClass::interior;
  const int s = information_exponent(oracle.teacher_series);
  const double as_sq =
      oracle.teacher_series.coeffs[s] * oracle.teacher_series.coeffs[s];
  const double equator_bound = std::pow(2.0 * eps / (s * as_sq), 1.0 / (2.0 * s - 1.0));
  const double pole_term = std::pow(2.0, 2.0 * s - 1.0) / (s * as_sq);
  const double pole_bound = pole_term * pole_term * eps * eps;
  const bool near_equator = std::abs(m) <= equator_bound;
  const bool near_pole = 1.0 - std::abs(m) <= pole_bound;
  if (near_equator && near_pole) {
    return std::abs(m) < 1.0 - std::abs(m) ? CriticalClass::equator : CriticalClass::pole;
  }
  if (near_equator) return CriticalClass::equator;
  if (near_pole) return CriticalClass::pole;
  return CriticalClass::theory_violation;
}

std::vector<LandscapeScanRow> landscape_scan(const PopulationOracle& oracle, int grid) {
  if (grid < 2) throw std::invalid_argument("grid must have at least 2 points");
  std::vector<LandscapeScanRow> rows(static_cast<std::size_t>(grid));
#pragma omp parallel for schedule(dynamic, 4) num_threads(par::max_threads())
  for (int i = 0; i < grid; ++i) {
    const double m = -1.0 + 2.0 * i / (grid - 1);
    const ProjectedLoss pl = projected_population_loss(oracle, m);
    const double res = critical_residual(oracle, m);
    const PopulationGrads g = population_grads(oracle, pl.c_opt, m);
    rows[static_cast<std::size_t>(i)] = {
        m, pl.value, res,
        std::abs(g.grad_m_coef) * std::sqrt(std::max(0.0, 1.0 - m * m))};
  }
  return rows;
}

void write_scan_csv(const std::vector<LandscapeScanRow>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "m,loss,residual,grad_mag\n");
  for (const auto& r : rows) {
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", r.m, r.loss, r.residual, r.grad_mag);
  }
  std::fclose(f);
}

DeviationProbe deviation_probe(const FeatureBank& bank, const TeacherSpec& teacher,
                               const std::vector<int>& ns, int sample_count, double r,
                               std::uint64_t seed) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  if (ns.empty()) throw std::invalid_argument("need at least one sample size");
  const int d = static_cast<int>(teacher.theta_star.size());
  const int N = bank.size();
  const int J = teacher.series.truncation_order();
  const QuadratureRule quad = QuadratureRule::gauss_hermite(256);
  const FeatureOperator op = build_operator(bank, J, 0.0, quad);

  // probe points are shared across the n grid
  Rng rng = Rng::stream(seed, "probe/points");
  std::vector<Eigen::VectorXd> cs, thetas;
  for (int p = 0; p < sample_count; ++p) {
    const double radius = r * std::pow(rng.uniform(), 1.0 / N);
    cs.push_back(radius * rng.sphere(N));
    thetas.push_back(rng.sphere(d));
  }

  DeviationProbe probe;
  probe.ns = ns;
  const double inv_sqrt_n_feat = 1.0 / std::sqrt(static_cast<double>(N));
  for (std::size_t t = 0; t < ns.size(); ++t) {
    const int n = ns[t];
    const Dataset data =
        sample_dataset(teacher, n, d, seed + static_cast<std::uint64_t>(t), "probe");
    double max_theta = 0.0, max_c = 0.0;
    for (int p = 0; p < sample_count; ++p) {
      const Eigen::VectorXd& c = cs[static_cast<std::size_t>(p)];
      const Eigen::VectorXd& theta = thetas[static_cast<std::size_t>(p)];
      const double m = theta.dot(teacher.theta_star);

      // empirical gradients (Euclidean theta block), lambda-free
      const Eigen::VectorXd u = data.xs * theta;
      Eigen::VectorXd gc_emp = Eigen::VectorXd::Zero(N);
      Eigen::VectorXd sample_factor(n);
      for (int i = 0; i < n; ++i) {
        double value = 0.0, slope = 0.0;
        for (int k = 0; k < N; ++k) {
          const double tt = bank.signs[k] * u[i] - bank.biases[k];
          if (tt > 0.0) {
            value += c[k] * tt;
            slope += c[k] * bank.signs[k];
          }
        }
        value *= inv_sqrt_n_feat;
        slope *= inv_sqrt_n_feat;
        const double res = value - data.ys[i];
        sample_factor[i] = 2.0 * res * slope;
        for (int k = 0; k < N; ++k) {
          const double tt = bank.signs[k] * u[i] - bank.biases[k];
          if (tt > 0.0) gc_emp[k] += 2.0 * res * inv_sqrt_n_feat * tt;
        }
      }
      gc_emp /= n;
      const Eigen::VectorXd gtheta_emp = data.xs.transpose() * sample_factor / n;

      // population gradients
      const Eigen::VectorXd v = op.t_vectors * gm_coeffs(teacher.series, m);
      const Eigen::VectorXd gc_pop = 2.0 * (op.gram * c - v);
      const Eigen::VectorXd vbar = op.t_vectors * gbar_coeffs(teacher.series, m);
      const Eigen::VectorXd gtheta_pop = -2.0 * c.dot(vbar) * teacher.theta_star;

      max_c = std::max(max_c, (gc_emp - gc_pop).norm());
      max_theta = std::max(max_theta, (gtheta_emp - gtheta_pop).norm());
    }
    probe.max_dev_theta.push_back(max_theta);
    probe.max_dev_c.push_back(max_c);
  }

  auto slope_of = [&](const std::vector<double>& ys) {
    const std::size_t k = ns.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double x = std::log(static_cast<double>(ns[i]));
      const double y = std::log(std::max(ys[i], 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
  };
  probe.slope_theta = slope_of(probe.max_dev_theta);
  probe.slope_c = slope_of(probe.max_dev_c);
  return probe;
}

}  // namespace sindex
