#include "sindex/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sindex/rng.hpp"

namespace sindex {

LinkSpec LinkSpec::default_teacher() {
  LinkSpec s;
  s.kind = LinkKind::piecewise_linear;
  s.knots = {-2.0, -1.0, 0.0, 1.0, 2.0};
  s.values = {0.0, -0.5, 1.0, 0.75, 0.0};
  return s;
}

LinkSpec LinkSpec::monomial(int j) {
  if (j < 1) throw std::invalid_argument("monomial order must be >= 1");
  LinkSpec s;
  s.kind = LinkKind::hermite_monomial;
  s.monomial_order = j;
  return s;
}

LinkSpec LinkSpec::relu_link() {
  LinkSpec s;
  s.kind = LinkKind::relu;
  return s;
}

LinkSpec LinkSpec::stripped(LinkSpec base, int s) {
  if (s < 1) throw std::invalid_argument("strip order must be >= 1");
  base.strip = s;
  return base;
}

double LinkSpec::eval_raw(double z) const {
  switch (kind) {
    case LinkKind::piecewise_linear: {
      if (z <= knots.front() || z >= knots.back()) return 0.0;
      auto it = std::upper_bound(knots.begin(), knots.end(), z);
      const std::size_t hi = static_cast<std::size_t>(it - knots.begin());
      const double x0 = knots[hi - 1], x1 = knots[hi];
      const double v0 = values[hi - 1], v1 = values[hi];
      return v0 + (v1 - v0) * (z - x0) / (x1 - x0);
    }
    case LinkKind::hermite_monomial:
      return eval_hermite(monomial_order, z);
    case LinkKind::relu:
      return z > 0.0 ? z : 0.0;
    case LinkKind::custom_series:
      return custom.eval(z);
  }
  return 0.0;
}

double TeacherSpec::eval(double z) const {
  double low = 0.0, hm1 = 0.0, h = 1.0;
  for (int j = 0; j < static_cast<int>(strip_coeffs.size()); ++j) {
    low += strip_coeffs[j] * h;
    const double hp1 = (z * h - std::sqrt(static_cast<double>(j)) * hm1) /
                       std::sqrt(static_cast<double>(j + 1));
    hm1 = h;
    h = hp1;
  }
  return (link.eval_raw(z) - low) / tail_norm;
}

TeacherSpec make_teacher(const LinkSpec& link, int d, std::uint64_t seed, double sigma,
                         int J, bool theta_star_e1, bool quiet) {
  if (d < 2) throw std::invalid_argument("dimension must be >= 2");
  if (sigma < 0.0) throw std::invalid_argument("noise level must be >= 0");
  if (link.strip < 1) throw std::invalid_argument("strip order must be >= 1");
  if (link.kind == LinkKind::piecewise_linear &&
      (link.knots.size() != link.values.size() || link.knots.size() < 2)) {
    throw std::invalid_argument("piecewise link needs matching knots and values");
  }

  TeacherSpec t;
  t.link = link;
  t.sigma = sigma;

  HermiteSeries raw;
  switch (link.kind) {
    case LinkKind::piecewise_linear: {
      const QuadratureRule rule = QuadratureRule::composite(link.knots);
      raw = project_to_series([&](double z) { return link.eval_raw(z); }, J, rule);
      t.raw_norm_sq = rule.integrate([&](double z) {
        const double f = link.eval_raw(z);
        return f * f;
      });
      break;
    }
    case LinkKind::hermite_monomial: {
      if (link.monomial_order > J) throw std::invalid_argument("monomial order exceeds J");
      raw = HermiteSeries::basis(link.monomial_order, J);
      t.raw_norm_sq = 1.0;
      break;
    }
    case LinkKind::relu: {
      raw = relu_coeffs_closed_form(J);
      t.raw_norm_sq = 0.5;  // E[z^2 1{z>0}]
      break;
    }
    case LinkKind::custom_series: {
      raw = link.custom;
      if (raw.truncation_order() < J) {
        Eigen::VectorXd padded = Eigen::VectorXd::Zero(J + 1);
        padded.head(raw.coeffs.size()) = raw.coeffs;
        raw = HermiteSeries(std::move(padded));
      }
      t.raw_norm_sq = raw.norm_sq();
      break;
    }
  }

  const int s = link.strip;
  if (s > J) throw std::invalid_argument("strip order exceeds truncation order");
  t.strip_coeffs = raw.coeffs.head(s);
  const double tail_sq = t.raw_norm_sq - t.strip_coeffs.squaredNorm();
  if (tail_sq < 1e-12) throw std::runtime_error("degenerate link: zero after stripping");
  t.tail_norm = std::sqrt(tail_sq);

  // normalize by the exact tail norm so the series and the callable agree on
  // the same unit-norm function; the truncated series then carries norm
  // 1 - (mass above J) instead of exactly 1
  HermiteSeries stripped = raw;
  stripped.coeffs.head(s).setZero();
  stripped.coeffs /= t.tail_norm;
  t.series = stripped;
  t.info_exponent = information_exponent(t.series);
  t.tail_mass = estimate_tail_mass(t.series);
  if (t.tail_mass > 1e-6 && !quiet) {
    std::fprintf(stderr,
                 "warning: teacher truncation tail mass %.3e exceeds 1e-06 at J=%d\n",
                 t.tail_mass, J);
  }

  if (theta_star_e1) {
    t.theta_star = Eigen::VectorXd::Zero(d);
    t.theta_star[0] = 1.0;
  } else {
    Rng rng = Rng::stream(seed, "theta_star");
    t.theta_star = rng.sphere(d);
  }

  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  auto mixd = [&](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    mix(bits);
  };
  mix(static_cast<std::uint64_t>(link.kind));
  for (double k : link.knots) mixd(k);
  for (double v : link.values) mixd(v);
  mix(static_cast<std::uint64_t>(link.monomial_order));
  mix(static_cast<std::uint64_t>(s));
  mix(static_cast<std::uint64_t>(d));
  mix(seed);
  mixd(sigma);
  t.hash = h;
  return t;
}

Dataset sample_dataset(const TeacherSpec& teacher, int n, int d, std::uint64_t seed,
                       std::string_view stream_tag) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  if (d != teacher.theta_star.size()) {
    throw std::invalid_argument("dimension does not match teacher direction");
  }
  Dataset data;
  data.seed = seed;
  data.teacher_hash = teacher.hash;
  data.stream_tag = std::string(stream_tag);
  data.xs.resize(n, d);
  data.ys.resize(n);
  Rng xs_rng = Rng::stream(seed, std::string(stream_tag) + "/x");
  Rng noise_rng = Rng::stream(seed, std::string(stream_tag) + "/noise");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.xs(i, j) = xs_rng.normal();
  }
  const Eigen::VectorXd proj = data.xs * teacher.theta_star;
  for (int i = 0; i < n; ++i) {
    data.ys[i] = teacher.eval(proj[i]) + teacher.sigma * noise_rng.normal();
  }
  return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  for (int j = 0; j < data.dim(); ++j) std::fprintf(f, "x_%d,", j + 1);
  std::fprintf(f, "y\n");
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.dim(); ++j) std::fprintf(f, "%.17g,", data.xs(i, j));
    std::fprintf(f, "%.17g\n", data.ys[i]);
  }
  std::fclose(f);
}

namespace {
constexpr std::uint64_t kDatasetMagic = 0x53494e4445584453ull;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  const std::int64_t n = data.n(), d = data.dim();
  out.write(reinterpret_cast<const char*>(&kDatasetMagic), sizeof(kDatasetMagic));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(&data.seed), sizeof(data.seed));
  out.write(reinterpret_cast<const char*>(&data.teacher_hash), sizeof(data.teacher_hash));
  out.write(reinterpret_cast<const char*>(data.xs.data()),
            static_cast<std::streamsize>(sizeof(double) * n * d));
  out.write(reinterpret_cast<const char*>(data.ys.data()),
            static_cast<std::streamsize>(sizeof(double) * n));
}

bool load_dataset(const std::string& path, Dataset& data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t magic = 0;
  std::int64_t n = 0, d = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  if (!in || magic != kDatasetMagic || n <= 0 || d <= 0) return false;
  in.read(reinterpret_cast<char*>(&data.seed), sizeof(data.seed));
  in.read(reinterpret_cast<char*>(&data.teacher_hash), sizeof(data.teacher_hash));
  data.xs.resize(n, d);
  data.ys.resize(n);
  in.read(reinterpret_cast<char*>(data.xs.data()),
          static_cast<std::streamsize>(sizeof(double) * n * d));
  in.read(reinterpret_cast<char*>(data.ys.data()),
          static_cast<std::streamsize>(sizeof(double) * n));
  return static_cast<bool>(in);
}

}  // namespace sindex
