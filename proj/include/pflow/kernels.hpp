#pragma once

#include <cstddef>
#include <cstdint>

namespace pflow::kernels {

/// Batched arithmetic kernels behind the hot loops: distance scans against a
/// base point, pairwise orbit diameters and weighted reductions.
///
/// Sample coordinates are passed as SoA (one contiguous array per coordinate,
/// `soa[c][i]` is coordinate c of sample i). `periodic[c] != 0` marks a unit
/// circle factor: differences are wrapped to the shortest arc before
/// squaring. All distances are squared product-metric distances.
struct Ops {
  /// out[i] = squared distance from base to sample i.
  void (*dist2_batch)(const double* const* soa, const double* base,
                      const std::uint8_t* periodic, std::size_t dim,
                      std::size_t n, double* out);

  /// Index of the minimum (first occurrence); *min_out gets the value.
  std::size_t (*argmin)(const double* x, std::size_t n, double* min_out);

  /// max over i<j of squared distance between samples i and j.
  double (*max_pairwise_dist2)(const double* const* soa,
                               const std::uint8_t* periodic, std::size_t dim,
                               std::size_t n);

  /// sum_i w[i]*v[i].
  double (*weighted_sum)(const double* w, const double* v, std::size_t n);

  const char* name;
};

/// Portable reference kernels.
const Ops& scalar_ops();

/// AVX2+FMA kernels, or nullptr when unsupported (compile- or run-time).
const Ops* avx2_ops();

/// Kernels selected for this process: the widest supported variant, unless
/// the environment variable PERIODFLOW_FORCE_SCALAR is set.
const Ops& ops();

}  // namespace pflow::kernels
