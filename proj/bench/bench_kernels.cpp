// Timing comparison between the serial reference kernels and the OpenMP
// block-reduced ones used in training.
#include <chrono>
#include <cstdio>

#include "sindex/model.hpp"
#include "sindex/parallel.hpp"
#include "sindex/reference.hpp"
#include "sindex/rng.hpp"

using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double time_ms(F&& f, int reps) {
  // one warmup, then best of reps
  f();
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main() {
  const int d = 10, N = 100;
  const double lambda = 1e-3;
  std::printf("threads: %d\n", sindex::par::max_threads());
  std::printf("%8s %14s %14s %14s %9s\n", "n", "kernel", "serial_ms", "parallel_ms",
              "speedup");
  for (int n : {2048, 8192, 32768}) {
    const sindex::TeacherSpec teacher = sindex::make_teacher(
        sindex::LinkSpec::default_teacher(), d, 1, 1e-3, 64, false, true);
    const sindex::FeatureBank bank = sindex::sample_bank(N, 2.0, 1);
    const sindex::Dataset data = sindex::sample_dataset(teacher, n, d, 1, "train");
    sindex::Rng rng(3);
    sindex::ModelState state;
    state.theta = rng.sphere(d);
    state.c = rng.normal_vector(N) * 0.1;

    const double t_loss_ref = time_ms(
        [&] { volatile double v = sindex::ref::empirical_loss(state, bank, data, lambda); (void)v; },
        5);
    const double t_loss_par = time_ms(
        [&] { volatile double v = sindex::empirical_loss(state, bank, data, lambda); (void)v; },
        5);
    std::printf("%8d %14s %14.3f %14.3f %8.2fx\n", n, "loss", t_loss_ref, t_loss_par,
                t_loss_ref / t_loss_par);

    const double t_grad_ref = time_ms(
        [&] {
          volatile double v =
              sindex::ref::grad_c(state, bank, data, lambda).norm() +
              sindex::ref::grad_theta_spherical(state, bank, data, lambda).norm();
          (void)v;
        },
        5);
    const double t_grad_par = time_ms(
        [&] {
          const auto lg = sindex::loss_and_grads(state, bank, data, lambda);
          volatile double v = lg.grad_c.norm() + lg.grad_theta_sph.norm();
          (void)v;
        },
        5);
    std::printf("%8d %14s %14.3f %14.3f %8.2fx\n", n, "grads", t_grad_ref, t_grad_par,
                t_grad_ref / t_grad_par);
  }
  return 0;
}
