#pragma once

#include "mandcad/cb_pipeline.hpp"
#include "mandcad/ob_pipeline.hpp"

#include <functional>

namespace mandcad {

/// Runs fn(i) for i in [0, n) across up to `threads` workers (0 picks the
/// hardware count). Exceptions from workers are rethrown on the caller.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

struct VolumeDetections {
  std::vector<Detection2D> cb;
  std::vector<Detection2D> ob;
};

/// Both pipelines over every slice, sharing the per-slice front end. A null
/// model skips the close-border pipeline. CB detections use `cb_threshold`,
/// not params.score_threshold, so callers can sweep operating points.
VolumeDetections detect_volume(const CtVolume& volume, const PipelineParams& params,
                               const MlpModel* model, double cb_threshold, int threads = 0);

/// Candidate feature vectors of a whole volume with slice/blob geometry,
/// used for training pools and threshold sweeps.
struct ScoredCandidate {
  int slice_index = 0;
  Eigen::Vector2d centroid_px{0, 0};
  double equiv_diameter_mm = 0;
  double score = 0;
  BBox roi_bbox;
};

/// Scores every candidate in the volume with the model (no thresholding).
std::vector<ScoredCandidate> score_volume_candidates(const CtVolume& volume,
                                                     const PipelineParams& params,
                                                     const MlpModel& model, int threads = 0);

}  // namespace mandcad
