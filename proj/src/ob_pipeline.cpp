#include "mandcad/ob_pipeline.hpp"

#include "mandcad/volume_io.hpp"

namespace mandcad {

MaskImage subtract(const MaskImage& a, const MaskImage& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("subtract: dimension mismatch");
  return a && !b;
}

ObStages run_ob_stages(const SliceStages& stages, const PipelineParams& params) {
  ObStages ob;
  const int h = static_cast<int>(stages.closed.rows());

  // Step 3: the denoising closing with everything in the bottom third
  // eliminated before the large closing can act on it. The shared stage is
  // reusable whenever both pipelines use the same small SE.
  if (stages.threshold >= 0 && params.ob_small_fill_mm != params.cb_fill_diameter_mm)
    ob.denoised = morph_close(stages.binary,
                              fill_se_for_diameter(params.ob_small_fill_mm, params.spacing));
  else
    ob.denoised = stages.closed;
  for (int y = 0; y < h; ++y)
    if (3 * y > 2 * h) ob.denoised.row(y).setConstant(false);

  if (stages.threshold < 0) {
    ob.filled = ob.denoised;
    ob.difference = ob.denoised;
    return ob;
  }

  // Step 4: fill large openings.
  ob.filled = morph_close(ob.denoised,
                          fill_se_for_diameter(params.ob_large_fill_mm, params.spacing));

  // Step 5: what the large closing added is the architectural defect map.
  ob.difference = subtract(ob.filled, ob.denoised);
  ob.kept_blobs = connected_components(ob.difference, Polarity::Foreground);
  std::erase_if(ob.kept_blobs, [&](const Blob& b) {
    const double d = equivalent_diameter_mm(b, params.spacing);
    return d <= params.ob_min_blob_mm || d >= params.ob_max_blob_mm;
  });
  return ob;
}

std::vector<Detection2D> ob_from_stages(const SliceStages& stages, const PipelineParams& params,
                                        int slice_index) {
  const ObStages ob = run_ob_stages(stages, params);
  std::vector<Detection2D> detections;
  detections.reserve(ob.kept_blobs.size());
  for (const Blob& blob : ob.kept_blobs) {
    Detection2D det;
    det.slice_index = slice_index;
    det.centroid_px = blob.centroid;
    det.equiv_diameter_mm = equivalent_diameter_mm(blob, params.spacing);
    det.score = 1.0;  // rule-based stage has no classifier confidence
    det.kind = LesionKind::OB;
    det.roi_bbox = blob.bbox;
    detections.push_back(det);
  }
  return detections;
}

std::vector<Detection2D> run_ob_slice(const SliceU16& slice, const PipelineParams& params,
                                      int slice_index) {
  return ob_from_stages(compute_slice_stages(slice, params), params, slice_index);
}

}  // namespace mandcad
