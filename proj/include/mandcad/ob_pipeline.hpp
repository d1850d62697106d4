#pragma once

#include "mandcad/cb_pipeline.hpp"

namespace mandcad {

/// a AND NOT b; dimensions must agree.
MaskImage subtract(const MaskImage& a, const MaskImage& b);

/// Intermediate images of the open-border chain, kept for tests and
/// overlays. `denoised` additionally has the bottom third blanked; `filled`
/// is the 30 mm closing of it.
struct ObStages {
  MaskImage denoised;
  MaskImage filled;
  MaskImage difference;
  std::vector<Blob> kept_blobs;
};

ObStages run_ob_stages(const SliceStages& stages, const PipelineParams& params);

/// Rule-based open-border detection for one slice: the small closing output
/// (bottom third blanked) is subtracted from the large closing output and
/// blobs strictly inside the (5 mm, 30 mm) window become detections with a
/// fixed score of 1.
std::vector<Detection2D> run_ob_slice(const SliceU16& slice, const PipelineParams& params,
                                      int slice_index = 0);
std::vector<Detection2D> ob_from_stages(const SliceStages& stages, const PipelineParams& params,
                                        int slice_index);

}  // namespace mandcad
