#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pflow/vecn.hpp"

namespace pflow {

struct Interval {
  double lo = 0;
  double hi = 0;
};

/// A box in R^n, optionally with circle factors and a half-space constraint.
///
/// Periodic coordinates model unit-circumference circle factors: values live
/// in [0,1) turns and their box is exactly [0,1). boundary_coord, when set,
/// marks a non-periodic coordinate constrained to >= 0 (the half-space model
/// of a boundary); its interval must start at 0.
///
/// The metric is the product metric: Euclidean on real coordinates, shortest
/// arc on circle factors, combined as root-sum-of-squares.
class Domain {
 public:
  /// Unit interval placeholder; real domains come from the other ctor.
  Domain() : Domain(std::vector<Interval>{{0.0, 1.0}}) {}

  Domain(std::vector<Interval> box, std::vector<bool> periodic = {},
         std::optional<std::size_t> boundary_coord = std::nullopt);

  std::size_t dim() const { return box_.size(); }
  const std::vector<Interval>& box() const { return box_; }
  bool is_periodic(std::size_t c) const { return periodic_[c] != 0; }
  const std::uint8_t* periodic_mask() const { return periodic_.data(); }
  std::optional<std::size_t> boundary_coord() const { return boundary_coord_; }

  /// True when all non-periodic coordinates lie inside the box.
  bool contains(const Point& x) const;

  /// Wraps periodic coordinates into [0,1).
  Point wrap(Point x) const;

  double distance2(const Point& a, const Point& b) const;
  double distance(const Point& a, const Point& b) const;

  /// Difference b-a with periodic components wrapped to the shortest arc.
  Vec displacement(const Point& a, const Point& b) const;

 private:
  std::vector<Interval> box_;
  std::vector<std::uint8_t> periodic_;
  std::optional<std::size_t> boundary_coord_;
};

/// Wraps a single angular coordinate into [0,1).
double wrap_unit(double x);

/// Signed shortest-arc difference of two angles in turns, in [-1/2, 1/2).
double wrap_signed(double d);

}  // namespace pflow
