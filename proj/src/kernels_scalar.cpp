#include <cmath>
#include <limits>

#include "pflow/kernels.hpp"

namespace pflow::kernels {
namespace {

inline double wrap_turns(double d) { return d - std::nearbyint(d); }

void dist2_batch_scalar(const double* const* soa, const double* base,
                        const std::uint8_t* periodic, std::size_t dim,
                        std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double* xs = soa[c];
    const double b = base[c];
    if (periodic[c]) {
      for (std::size_t i = 0; i < n; ++i) {
        double d = wrap_turns(xs[i] - b);
        out[i] += d * d;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        double d = xs[i] - b;
        out[i] += d * d;
      }
    }
  }
}

std::size_t argmin_scalar(const double* x, std::size_t n, double* min_out) {
  std::size_t best = 0;
  double m = n ? x[0] : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < m) {
      m = x[i];
      best = i;
    }
  }
  if (min_out) *min_out = m;
  return best;
}

double max_pairwise_dist2_scalar(const double* const* soa,
                                 const std::uint8_t* periodic, std::size_t dim,
                                 std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        double d = soa[c][j] - soa[c][i];
        if (periodic[c]) d = wrap_turns(d);
        s += d * d;
      }
      if (s > best) best = s;
    }
  }
  return best;
}

double weighted_sum_scalar(const double* w, const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * v[i];
  return s;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{dist2_batch_scalar, argmin_scalar,
                       max_pairwise_dist2_scalar, weighted_sum_scalar,
                       "scalar"};
  return ops;
}

}  // namespace pflow::kernels
