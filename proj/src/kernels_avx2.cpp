// AVX2+FMA variants of the batch kernels. This translation unit is built with
// -mavx2 -mfma on x86-64 and is only dispatched to after a cpuid check.

#include "pflow/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define PFLOW_X86 1
#else
#define PFLOW_X86 0
#endif

#if PFLOW_X86
#include <immintrin.h>

#include <cmath>
#include <limits>

namespace pflow::kernels {
namespace {

// d - nearbyint(d), round-to-nearest-even like the scalar path.
inline __m256d wrap_turns4(__m256d d) {
  __m256d r = _mm256_round_pd(d, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  return _mm256_sub_pd(d, r);
}

void dist2_batch_avx2(const double* const* soa, const double* base,
                      const std::uint8_t* periodic, std::size_t dim,
                      std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t c = 0; c < dim; ++c) {
      __m256d x = _mm256_loadu_pd(soa[c] + i);
      __m256d d = _mm256_sub_pd(x, _mm256_set1_pd(base[c]));
      if (periodic[c]) d = wrap_turns4(d);
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      double d = soa[c][i] - base[c];
      if (periodic[c]) d -= std::nearbyint(d);
      s += d * d;
    }
    out[i] = s;
  }
}

std::size_t argmin_avx2(const double* x, std::size_t n, double* min_out) {
  if (n == 0) {
    if (min_out) *min_out = std::numeric_limits<double>::quiet_NaN();
    return 0;
  }
  double m = x[0];
  std::size_t i = 1;
  if (n >= 8) {
    __m256d vm = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4)
      vm = _mm256_min_pd(vm, _mm256_loadu_pd(x + i));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, vm);
    m = lane[0];
    for (int k = 1; k < 4; ++k) m = std::min(m, lane[k]);
  }
  for (; i < n; ++i) m = std::min(m, x[i]);
  // First index attaining the minimum, matching the scalar reference.
  std::size_t best = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (x[k] == m) {
      best = k;
      break;
    }
  }
  if (min_out) *min_out = m;
  return best;
}

double max_pairwise_dist2_avx2(const double* const* soa,
                               const std::uint8_t* periodic, std::size_t dim,
                               std::size_t n) {
  __m256d vbest = _mm256_setzero_pd();
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t c = 0; c < dim; ++c) {
        __m256d xj = _mm256_loadu_pd(soa[c] + j);
        __m256d d = _mm256_sub_pd(xj, _mm256_set1_pd(soa[c][i]));
        if (periodic[c]) d = wrap_turns4(d);
        acc = _mm256_fmadd_pd(d, d, acc);
      }
      vbest = _mm256_max_pd(vbest, acc);
    }
    for (; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        double d = soa[c][j] - soa[c][i];
        if (periodic[c]) d -= std::nearbyint(d);
        s += d * d;
      }
      if (s > best) best = s;
    }
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, vbest);
  for (int k = 0; k < 4; ++k) best = std::max(best, lane[k]);
  return best;
}

double weighted_sum_avx2(const double* w, const double* v, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(v + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(v + i + 4),
                         a1);
  }
  for (; i + 4 <= n; i += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(v + i), a0);
  __m256d a = _mm256_add_pd(a0, a1);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, a);
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) s += w[i] * v[i];
  return s;
}

}  // namespace

const Ops* avx2_ops() {
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (!supported) return nullptr;
  static const Ops ops{dist2_batch_avx2, argmin_avx2, max_pairwise_dist2_avx2,
                       weighted_sum_avx2, "avx2"};
  return &ops;
}

}  // namespace pflow::kernels

#else  // !PFLOW_X86

namespace pflow::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace pflow::kernels

#endif
