#include "sindex/model.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sindex/parallel.hpp"

namespace sindex {

std::string to_json(const ModelState& state) {
  nlohmann::json j;
  j["c"] = std::vector<double>(state.c.data(), state.c.data() + state.c.size());
  j["theta"] =
      std::vector<double>(state.theta.data(), state.theta.data() + state.theta.size());
  return j.dump();
}

ModelState model_state_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto c = j.at("c").get<std::vector<double>>();
  const auto th = j.at("theta").get<std::vector<double>>();
  ModelState s;
  s.c = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<long>(c.size()));
  s.theta = Eigen::Map<const Eigen::VectorXd>(th.data(), static_cast<long>(th.size()));
  return s;
}

namespace {

void check_dims(const ModelState& state, const FeatureBank& bank, const Dataset& data) {
  if (state.c.size() != bank.size()) {
    throw std::invalid_argument("second-layer weight length does not match bank size");
  }
  if (state.theta.size() != data.dim()) {
    throw std::invalid_argument("direction length does not match data dimension");
  }
}

// c^T Phi(u) and c^T Phi'(u) in one feature sweep.
inline void student_value_slope(const FeatureBank& bank, const Eigen::VectorXd& c,
                                double u, double inv_sqrt_n, double& value,
                                double& slope) {
  const int N = bank.size();
  const double* sg = bank.signs.data();
  const double* b = bank.biases.data();
  const double* cw = c.data();
  double a = 0.0, s = 0.0;
  if (bank.activation.kind == Activation::relu) {
    for (int k = 0; k < N; ++k) {
      const double t = sg[k] * u - b[k];
      if (t > 0.0) {
        a += cw[k] * t;
        s += cw[k] * sg[k];
      }
    }
  } else {
    for (int k = 0; k < N; ++k) {
      const double t = sg[k] * u - b[k];
      a += cw[k] * bank.activation.value(t);
      s += cw[k] * sg[k] * bank.activation.deriv(t);
    }
  }
  value = a * inv_sqrt_n;
  slope = s * inv_sqrt_n;
}

}  // namespace

double forward(const ModelState& state, const FeatureBank& bank,
               const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (state.c.size() != bank.size() || state.theta.size() != x.size()) {
    throw std::invalid_argument("forward: dimension mismatch");
  }
  const double u = state.theta.dot(x);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(bank.size()));
  double value, slope;
  student_value_slope(bank, state.c, u, inv_sqrt_n, value, slope);
  return value;
}

double empirical_loss(const ModelState& state, const FeatureBank& bank,
                      const Dataset& data, double lambda) {
  check_dims(state, bank, data);
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (data.n() < 1) throw std::invalid_argument("empty dataset");
  const int n = data.n();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(bank.size()));
  const Eigen::VectorXd u = data.xs * state.theta;
  const double mse = par::block_reduce<double>(
      n, 0.0,
      [&](std::int64_t lo, std::int64_t hi, double& acc) {
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
          double value, slope;
          student_value_slope(bank, state.c, u[i], inv_sqrt_n, value, slope);
          const double r = value - data.ys[i];
          s += r * r;
        }
        acc = s;
      },
      [](double& a, const double& b) { a += b; });
  return mse / n + lambda * state.c.squaredNorm();
}

LossAndGrads loss_and_grads(const ModelState& state, const FeatureBank& bank,
                            const Dataset& data, double lambda) {
  check_dims(state, bank, data);
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (data.n() < 1) throw std::invalid_argument("empty dataset");
  const int n = data.n();
  const int N = bank.size();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
  const Eigen::VectorXd u = data.xs * state.theta;
  Eigen::VectorXd sample_factor(n);  // 2 r_i (c^T Phi'(u_i)) / n

  struct Acc {
    double loss = 0.0;
    Eigen::VectorXd gc;
  };
  Acc zero;
  zero.gc = Eigen::VectorXd::Zero(N);
  const double* sg = bank.signs.data();
  const double* b = bank.biases.data();
  const bool is_relu = bank.activation.kind == Activation::relu;

  Acc total = par::block_reduce<Acc>(
      n, zero,
      [&](std::int64_t lo, std::int64_t hi, Acc& acc) {
        std::vector<double> feat(static_cast<std::size_t>(N));
        for (std::int64_t i = lo; i < hi; ++i) {
          double a = 0.0, slope = 0.0;
          if (is_relu) {
            for (int k = 0; k < N; ++k) {
              const double t = sg[k] * u[i] - b[k];
              const double f = t > 0.0 ? t : 0.0;
              feat[k] = f;
              a += state.c[k] * f;
              if (t > 0.0) slope += state.c[k] * sg[k];
            }
          } else {
            for (int k = 0; k < N; ++k) {
              const double t = sg[k] * u[i] - b[k];
              const double f = bank.activation.value(t);
              feat[k] = f;
              a += state.c[k] * f;
              slope += state.c[k] * sg[k] * bank.activation.deriv(t);
            }
          }
          a *= inv_sqrt_n;
          slope *= inv_sqrt_n;
          const double r = a - data.ys[i];
          acc.loss += r * r;
          const double w = 2.0 * r * inv_sqrt_n;
          for (int k = 0; k < N; ++k) acc.gc[k] += w * feat[k];
          sample_factor[i] = 2.0 * r * slope;
        }
      },
      [](Acc& x, const Acc& y) {
        x.loss += y.loss;
        x.gc += y.gc;
      });

  LossAndGrads out;
  out.loss = total.loss / n + lambda * state.c.squaredNorm();
  out.grad_c = total.gc / n + 2.0 * lambda * state.c;
  Eigen::VectorXd g = data.xs.transpose() * sample_factor / n;
  out.grad_theta_sph = g - g.dot(state.theta) * state.theta;
  return out;
}

Eigen::VectorXd grad_c(const ModelState& state, const FeatureBank& bank,
                       const Dataset& data, double lambda) {
  return loss_and_grads(state, bank, data, lambda).grad_c;
}

Eigen::VectorXd grad_theta_spherical(const ModelState& state, const FeatureBank& bank,
                                     const Dataset& data, double lambda) {
  if (std::abs(state.theta.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("spherical gradient requires a unit direction");
  }
  return loss_and_grads(state, bank, data, lambda).grad_theta_sph;
}

bool kink_free(const ModelState& state, const FeatureBank& bank, const Dataset& data,
               double margin) {
  check_dims(state, bank, data);
  const Eigen::VectorXd u = data.xs * state.theta;
  for (int i = 0; i < data.n(); ++i) {
    for (int k = 0; k < bank.size(); ++k) {
      if (std::abs(bank.signs[k] * u[i] - bank.biases[k]) < margin) return false;
    }
  }
  return true;
}

}  // namespace sindex
