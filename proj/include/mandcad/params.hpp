#pragma once

#include "mandcad/types.hpp"

namespace mandcad {

/// Every tunable constant of the two pipelines and the 3D aggregation, with
/// its stock value. All physical sizes are millimetres and convert to pixels
/// through VoxelSpacing.
struct PipelineParams {
  VoxelSpacing spacing{};

  // Close-border pipeline
  double cb_fill_diameter_mm = 5.0;      // denoising closing SE
  double cb_min_hole_diameter_mm = 5.0;  // holes above this are candidates
  int glcm_levels = 32;
  int roi_margin_px = 2;

  // Open-border pipeline
  double ob_small_fill_mm = 5.0;   // step-3 closing SE
  double ob_large_fill_mm = 30.0;  // step-4 closing SE
  double ob_min_blob_mm = 5.0;     // kept strictly inside (min, max)
  double ob_max_blob_mm = 30.0;

  // 3D aggregation
  double link_radius_mm = 5.0;
  int min_persistence = 5;
  double match_radius_floor_mm = 5.0;  // match iff dist <= max(floor, diameter/2)

  double score_threshold = 0.5;  // stock MLP operating point

  void validate() const {
    spacing.validate();
    if (cb_fill_diameter_mm <= 0 || cb_min_hole_diameter_mm <= 0 || ob_small_fill_mm <= 0 ||
        ob_large_fill_mm <= 0 || ob_min_blob_mm <= 0 || ob_max_blob_mm <= ob_min_blob_mm)
      throw std::invalid_argument("PipelineParams: size thresholds must be positive and ordered");
    if (glcm_levels < 2) throw std::invalid_argument("PipelineParams: glcm_levels must be >= 2");
    if (roi_margin_px < 0) throw std::invalid_argument("PipelineParams: roi_margin_px negative");
    if (link_radius_mm <= 0) throw std::invalid_argument("PipelineParams: link_radius_mm <= 0");
    if (min_persistence < 1) throw std::invalid_argument("PipelineParams: min_persistence < 1");
    if (score_threshold < 0 || score_threshold > 1)
      throw std::invalid_argument("PipelineParams: score_threshold outside [0, 1]");
  }
};

}  // namespace mandcad
