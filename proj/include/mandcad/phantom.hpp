#pragma once

#include "mandcad/eval3d.hpp"
#include "mandcad/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mandcad {

/// Horseshoe cross-section of the synthetic mandible, constant across
/// slices. The arc is an annulus segment around `center_mm` with a downward
/// opening; a cortical rim lines the band on every side of the trabecular
/// interior. Intensity levels are fractions of the 16-bit range.
struct ArcGeometry {
  Eigen::Vector2d center_mm{51.2, 46.0};
  double mid_radius_mm = 35.0;
  double half_width_mm = 8.0;
  double cortical_thickness_mm = 2.5;
  double opening_half_angle_deg = 40.0;  // opening centred on the +y direction
  double background_level = 0.05;
  double trabecular_level = 0.35;
  double cortical_level = 0.80;

  double inner_radius_mm() const { return mid_radius_mm - half_width_mm; }
  double outer_radius_mm() const { return mid_radius_mm + half_width_mm; }
};

/// Benign intramedullary structures: elongated background-level ellipsoids
/// inside the band, oriented along the local arc tangent. They binarize as
/// enclosed holes, which makes them the phantom's source of normal-class
/// candidate ROIs. Widths under the 5 mm fill diameter vanish in the
/// denoising closing and are cosmetic only.
struct PocketParams {
  int count = 3;
  double width_mm = 4.0;
  double length_mm = 12.0;
  double depth_mm = 8.0;  // extent along z
};

struct PhantomLesionSpec {
  LesionKind kind = LesionKind::CB;
  Eigen::Vector3d centroid_mm{0, 0, 0};
  double diameter_mm = 0;
};

struct PhantomSpec {
  std::uint64_t seed = 0;
  int width = 512;
  int height = 512;
  int n_slices = 100;
  VoxelSpacing spacing{};
  ArcGeometry arc{};
  PocketParams pockets{};
  std::vector<PhantomLesionSpec> lesions;
  /// Gaussian noise on bone tissue, as a fraction of the 16-bit range.
  double noise_sigma = 0.02;
  /// Uniform jitter half-range on background-level voxels. Kept small so the
  /// background collapses into a couple of occupied 8-bit bins after
  /// normalization; a Gaussian tail here would leak speckles past any
  /// entropy-derived threshold.
  double background_jitter = 0.003;
  double cb_rim_thickness_mm = 1.5;
  /// When set, CB diameters must lie in [7.5, 20] mm and OB diameters in
  /// [10, 25] mm, the ranges the pipelines are designed for.
  bool enforce_design_ranges = true;
  std::string patient_id = "phantom";
};

struct PhantomResult {
  CtVolume volume;
  std::vector<GroundTruthLesion> truth;
};

/// Renders the phantom and returns the volume plus its ground truth. The
/// output is a deterministic function of the spec (noise streams are seeded
/// per slice). Lesions must sit inside the band, in the upper two thirds of
/// the slice, and must not overlap; violations raise SpecError.
PhantomResult generate_phantom(const PhantomSpec& spec);

// JSON (de)serialization of specs, used by the CLI and the manifests the
// phantom command writes next to its outputs.
PhantomSpec phantom_spec_from_json_file(const std::filesystem::path& path);
void write_phantom_manifest(const PhantomSpec& spec, const std::filesystem::path& path);

}  // namespace mandcad
