#include "pflow/geometry.hpp"

#include <cmath>

#include "pflow/errors.hpp"

namespace pflow {

double wrap_unit(double x) {
  double f = x - std::floor(x);
  return f < 1.0 ? f : 0.0;
}

double wrap_signed(double d) { return d - std::nearbyint(d); }

Domain::Domain(std::vector<Interval> box, std::vector<bool> periodic,
               std::optional<std::size_t> boundary_coord)
    : box_(std::move(box)), boundary_coord_(boundary_coord) {
  const std::size_t n = box_.size();
  if (n == 0 || n > Vec::kMaxDim)
    throw InvalidParam("domain dimension must be in [1, 8]");
  periodic_.assign(n, 0);
  for (std::size_t c = 0; c < periodic.size() && c < n; ++c)
    periodic_[c] = periodic[c] ? 1 : 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (periodic_[c]) {
      if (box_[c].lo != 0.0 || box_[c].hi != 1.0)
        throw InvalidParam("periodic coordinates must have box [0,1)");
    } else if (!(box_[c].lo < box_[c].hi)) {
      throw InvalidParam("degenerate box interval");
    }
  }
  if (boundary_coord_) {
    std::size_t c = *boundary_coord_;
    if (c >= n || periodic_[c])
      throw InvalidParam("boundary_coord must index a non-periodic axis");
    if (box_[c].lo != 0.0)
      throw InvalidParam("boundary_coord interval must start at 0");
  }
}

bool Domain::contains(const Point& x) const {
  if (x.size() != dim()) return false;
  for (std::size_t c = 0; c < dim(); ++c) {
    if (periodic_[c]) continue;
    if (x[c] < box_[c].lo || x[c] > box_[c].hi) return false;
  }
  return true;
}

Point Domain::wrap(Point x) const {
  for (std::size_t c = 0; c < dim(); ++c)
    if (periodic_[c]) x[c] = wrap_unit(x[c]);
  return x;
}

double Domain::distance2(const Point& a, const Point& b) const {
  double s = 0;
  for (std::size_t c = 0; c < dim(); ++c) {
    double d = b[c] - a[c];
    if (periodic_[c]) d = wrap_signed(d);
    s += d * d;
  }
  return s;
}

double Domain::distance(const Point& a, const Point& b) const {
  return std::sqrt(distance2(a, b));
}

Vec Domain::displacement(const Point& a, const Point& b) const {
  Vec d(dim());
  for (std::size_t c = 0; c < dim(); ++c) {
    double v = b[c] - a[c];
    if (periodic_[c]) v = wrap_signed(v);
    d[c] = v;
  }
  return d;
}

}  // namespace pflow
