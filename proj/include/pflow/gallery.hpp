#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pflow/flow.hpp"

#include "json.hpp"

namespace pflow {

/// Closed-form ground truth attached to a gallery flow.
///
/// period(x) returns the minimal period, 0 at fixed points, and NaN at
/// non-periodic points. theta is the generator of the period-function group
/// where one exists on the entry's natural domain.
struct GalleryTruth {
  std::function<double(const Point&)> period;
  std::function<double(const Point&)> theta;
  std::optional<Point> fixed_point;
  std::vector<double> jacobian_at_fixed;  // row-major, empty if none
  std::string expected_class;             // verdict name, empty if n/a
};

struct GalleryEntry {
  std::string name;
  FlowSpec flow;
  GalleryTruth truth;
};

/// Built-in flows with analytic ground truth, serving as oracles for every
/// other module.
///
/// Names: seifert(k>=2), c_inf_disk, c0_disk, hamiltonian_even(b>=2),
/// linear(blocks), saddle, rotation(beta!=0), flat_circle.
/// Throws UnknownName / InvalidParam.
GalleryEntry gallery_get(const std::string& name,
                         const nlohmann::json& params = {});

std::vector<std::string> gallery_names();

/// Minimal period of the level set x^(2b) + y^2 = a^(2b) of the even
/// Hamiltonian example, by smooth quadrature (the oracle behind
/// hamiltonian_even's truth.period).
double hamiltonian_even_period(int b, double level_a);

}  // namespace pflow
