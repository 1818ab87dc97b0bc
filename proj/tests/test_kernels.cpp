#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "pflow/kernels.hpp"

using namespace pflow;

namespace {

struct Soa {
  std::vector<std::vector<double>> cols;
  std::vector<std::uint8_t> periodic;
  std::vector<const double*> ptrs;

  Soa(std::size_t dim, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    std::bernoulli_distribution flag(0.4);
    cols.resize(dim, std::vector<double>(n));
    periodic.resize(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      periodic[c] = flag(rng) ? 1 : 0;
      for (std::size_t i = 0; i < n; ++i) cols[c][i] = uni(rng);
    }
    for (auto& col : cols) ptrs.push_back(col.data());
  }
};

double naive_dist2(const Soa& s, const double* base, std::size_t i) {
  double acc = 0;
  for (std::size_t c = 0; c < s.cols.size(); ++c) {
    double d = s.cols[c][i] - base[c];
    if (s.periodic[c]) d -= std::nearbyint(d);
    acc += d * d;
  }
  return acc;
}

}  // namespace

TEST_CASE("dist2_batch matches the naive reference on both paths") {
  for (std::size_t dim : {1u, 2u, 3u, 4u, 5u}) {
    const std::size_t n = 237;
    Soa s(dim, n, 17 * dim);
    std::vector<double> base(dim, 0.31);
    std::vector<double> out_scalar(n), out_avx(n);

    kernels::scalar_ops().dist2_batch(s.ptrs.data(), base.data(),
                                      s.periodic.data(), dim, n,
                                      out_scalar.data());
    for (std::size_t i = 0; i < n; ++i)
      CHECK(out_scalar[i] == doctest::Approx(naive_dist2(s, base.data(), i))
                                 .epsilon(1e-14));

    if (const auto* avx = kernels::avx2_ops()) {
      avx->dist2_batch(s.ptrs.data(), base.data(), s.periodic.data(), dim, n,
                       out_avx.data());
      for (std::size_t i = 0; i < n; ++i)
        CHECK(out_avx[i] ==
              doctest::Approx(out_scalar[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("periodic distances are shift invariant") {
  Soa s(3, 64, 99);
  s.periodic = {1, 0, 1};
  std::vector<double> base{0.25, 1.5, 0.75};
  std::vector<double> a(64), b(64);
  kernels::ops().dist2_batch(s.ptrs.data(), base.data(), s.periodic.data(), 3,
                             64, a.data());
  for (std::size_t i = 0; i < 64; ++i) {
    s.cols[0][i] += 2.0;  // two full turns
    s.cols[2][i] -= 5.0;
  }
  kernels::ops().dist2_batch(s.ptrs.data(), base.data(), s.periodic.data(), 3,
                             64, b.data());
  for (std::size_t i = 0; i < 64; ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("argmin returns the first minimum on both paths") {
  std::vector<double> x{3.0, 1.0, 4.0, 1.0, 5.0, 1.0, 9.0};
  double m;
  CHECK(kernels::scalar_ops().argmin(x.data(), x.size(), &m) == 1);
  CHECK(m == 1.0);
  if (const auto* avx = kernels::avx2_ops()) {
    CHECK(avx->argmin(x.data(), x.size(), &m) == 1);
    CHECK(m == 1.0);
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> big(1001);
  for (auto& v : big) v = uni(rng);
  double ms, ma;
  std::size_t is = kernels::scalar_ops().argmin(big.data(), big.size(), &ms);
  if (const auto* avx = kernels::avx2_ops()) {
    std::size_t ia = avx->argmin(big.data(), big.size(), &ma);
    CHECK(is == ia);
    CHECK(ms == ma);
  }
}

TEST_CASE("max_pairwise_dist2 equals the reference") {
  for (std::size_t n : {2u, 9u, 100u}) {
    Soa s(3, n, 1234 + n);
    double ref = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double acc = 0;
        for (std::size_t c = 0; c < 3; ++c) {
          double d = s.cols[c][j] - s.cols[c][i];
          if (s.periodic[c]) d -= std::nearbyint(d);
          acc += d * d;
        }
        ref = std::max(ref, acc);
      }
    double got = kernels::scalar_ops().max_pairwise_dist2(
        s.ptrs.data(), s.periodic.data(), 3, n);
    CHECK(got == doctest::Approx(ref).epsilon(1e-14));
    if (const auto* avx = kernels::avx2_ops()) {
      double ga = avx->max_pairwise_dist2(s.ptrs.data(), s.periodic.data(), 3,
                                          n);
      CHECK(ga == doctest::Approx(ref).epsilon(1e-13));
    }
  }
}

TEST_CASE("weighted_sum agrees with long-double accumulation") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (std::size_t n : {1u, 7u, 8u, 4097u}) {
    std::vector<double> w(n), v(n);
    long double ref = 0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = uni(rng);
      v[i] = uni(rng);
      ref += static_cast<long double>(w[i]) * v[i];
    }
    double rs = kernels::scalar_ops().weighted_sum(w.data(), v.data(), n);
    CHECK(rs == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
    if (const auto* avx = kernels::avx2_ops()) {
      double ra = avx->weighted_sum(w.data(), v.data(), n);
      CHECK(ra == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
    }
  }
}

TEST_CASE("runtime dispatch picks a usable table") {
  const auto& ops = kernels::ops();
  CHECK(ops.dist2_batch != nullptr);
  CHECK(ops.name != nullptr);
}
