#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace pflow {

/// Fixed-capacity coordinate vector with a runtime dimension.
///
/// Flow evaluation is called millions of times per grid pass, so points are
/// plain value types with inline storage. Dimensions above kMaxDim are
/// rejected when the Domain is constructed.
class Vec {
 public:
  static constexpr std::size_t kMaxDim = 8;

  Vec() = default;
  explicit Vec(std::size_t n) : n_(n) { assert(n <= kMaxDim); }
  Vec(std::initializer_list<double> xs) : n_(xs.size()) {
    assert(n_ <= kMaxDim);
    std::size_t i = 0;
    for (double x : xs) a_[i++] = x;
  }
  explicit Vec(std::span<const double> xs) : n_(xs.size()) {
    assert(n_ <= kMaxDim);
    for (std::size_t i = 0; i < n_; ++i) a_[i] = xs[i];
  }

  std::size_t size() const { return n_; }
  double& operator[](std::size_t i) { return a_[i]; }
  double operator[](std::size_t i) const { return a_[i]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }
  std::span<const double> span() const { return {a_.data(), n_}; }
  std::span<double> span() { return {a_.data(), n_}; }

  Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < n_; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < n_; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (std::size_t i = 0; i < n_; ++i) a_[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }

  double norm2() const {
    double s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += a_[i] * a_[i];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.n_ != b.n_) return false;
    for (std::size_t i = 0; i < a.n_; ++i)
      if (a.a_[i] != b.a_[i]) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> a_{};
  std::size_t n_ = 0;
};

/// Chart coordinates of a point; angular coordinates are stored in turns.
using Point = Vec;

}  // namespace pflow
