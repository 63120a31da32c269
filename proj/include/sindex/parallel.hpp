#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sindex::par {

// Worker cap: SINDEX_THREADS env var wins, then OpenMP's default.
inline int max_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("SINDEX_THREADS")) {
      const int n = std::atoi(env);
      if (n >= 1) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
  }();
  return cached;
}

inline constexpr std::int64_t kBlock = 4096;

// Deterministic parallel reduction: the index range is cut into fixed-size
// blocks, each block accumulates serially, block results are combined by a
// pairwise tree in index order.  The result is bit-identical for any thread
// count because neither the block layout nor the combine order depends on it.
//
// Acc must be copyable; fn(lo, hi, acc) accumulates [lo, hi) into acc;
// combine(into, from) merges two accumulators.
template <class Acc, class BlockFn, class Combine>
Acc block_reduce(std::int64_t n, const Acc& zero, BlockFn&& fn, Combine&& combine,
                 std::int64_t block = kBlock) {
  if (n <= 0) return zero;
  const std::int64_t nb = (n + block - 1) / block;
  std::vector<Acc> partial(static_cast<std::size_t>(nb), zero);
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads())
  for (std::int64_t k = 0; k < nb; ++k) {
    const std::int64_t lo = k * block;
    const std::int64_t hi = std::min(n, lo + block);
    fn(lo, hi, partial[static_cast<std::size_t>(k)]);
  }
  // pairwise tree, fixed order
  for (std::int64_t stride = 1; stride < nb; stride *= 2) {
    for (std::int64_t k = 0; k + stride < nb; k += 2 * stride) {
      combine(partial[static_cast<std::size_t>(k)],
              partial[static_cast<std::size_t>(k + stride)]);
    }
  }
  return partial[0];
}

// Scalar convenience wrapper.
template <class ItemFn>
double block_sum(std::int64_t n, ItemFn&& item, std::int64_t block = kBlock) {
  return block_reduce<double>(
      n, 0.0,
      [&](std::int64_t lo, std::int64_t hi, double& acc) {
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += item(i);
        acc = s;
      },
      [](double& a, const double& b) { a += b; }, block);
}

}  // namespace sindex::par
