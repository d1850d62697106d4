// Shared phantom constructions for pipeline and acceptance tests.
#pragma once

#include "mandcad/phantom.hpp"

#include <cmath>
#include <numbers>

namespace phantom_helpers {

/// Point on the band mid-line at the given polar angle (degrees, y down).
inline Eigen::Vector2d band_point(const mandcad::ArcGeometry& arc, double angle_deg) {
  const double a = angle_deg * std::numbers::pi / 180.0;
  return arc.center_mm + arc.mid_radius_mm * Eigen::Vector2d{std::cos(a), std::sin(a)};
}

/// Spec for a thin test phantom whose slice 0 crosses the lesion equator.
inline mandcad::PhantomSpec single_lesion_spec(mandcad::LesionKind kind, double diameter_mm,
                                               double angle_deg = 200.0, int n_slices = 1,
                                               std::uint64_t seed = 42) {
  mandcad::PhantomSpec spec;
  spec.seed = seed;
  spec.n_slices = n_slices;
  spec.pockets.count = 0;
  const Eigen::Vector2d c = band_point(spec.arc, angle_deg);
  const double z = (n_slices / 2) * spec.spacing.slice_thickness_mm;
  spec.lesions.push_back({kind, {c.x(), c.y(), z}, diameter_mm});
  return spec;
}

}  // namespace phantom_helpers
