#include "mandcad/cb_pipeline.hpp"

#include "mandcad/volume_io.hpp"

namespace mandcad {

SliceStages compute_slice_stages(const SliceU16& slice, const PipelineParams& params) {
  params.validate();
  SliceStages stages;
  stages.normalized = normalize_slice(slice);
  try {
    stages.threshold = kapur_threshold(stages.normalized);
  } catch (const DegenerateInputError&) {
    stages.threshold = -1;  // constant slice: nothing can be foreground
    stages.binary.resize(slice.rows(), slice.cols());
    stages.binary.setConstant(false);
    stages.closed = stages.binary;
    return stages;
  }
  stages.binary = binarize(stages.normalized, stages.threshold);
  stages.closed = morph_close(stages.binary, fill_se_for_diameter(params.cb_fill_diameter_mm,
                                                                  params.spacing));
  return stages;
}

std::vector<Candidate> candidates_from_stages(const SliceStages& stages,
                                              const PipelineParams& params) {
  std::vector<Candidate> candidates;
  if (stages.threshold < 0) return candidates;

  std::vector<Blob> holes = extract_holes(stages.closed);
  std::erase_if(holes, [&](const Blob& b) {
    return equivalent_diameter_mm(b, params.spacing) <= params.cb_min_hole_diameter_mm;
  });
  holes = reject_lower_third(std::move(holes), static_cast<int>(stages.closed.rows()));

  candidates.reserve(holes.size());
  for (Blob& hole : holes) {
    Candidate c;
    c.roi = make_roi(stages.normalized, hole, params.roi_margin_px);
    c.blob = std::move(hole);
    candidates.push_back(std::move(c));
  }
  return candidates;
}

std::vector<Candidate> detect_candidates(const SliceU16& slice, const PipelineParams& params) {
  return candidates_from_stages(compute_slice_stages(slice, params), params);
}

std::vector<Detection2D> cb_from_stages(const SliceStages& stages, const PipelineParams& params,
                                        const MlpModel& model, double threshold, int slice_index) {
  std::vector<Detection2D> detections;
  for (const Candidate& candidate : candidates_from_stages(stages, params)) {
    const FeatureVector features = extract_feature_vector(candidate.roi, params.glcm_levels);
    const Classification cls = classify(model, features, threshold);
    if (cls.label != RoiLabel::Lesion) continue;
    Detection2D det;
    det.slice_index = slice_index;
    det.centroid_px = candidate.blob.centroid;
    det.equiv_diameter_mm = equivalent_diameter_mm(candidate.blob, params.spacing);
    det.score = cls.score;
    det.kind = LesionKind::CB;
    det.roi_bbox = {candidate.roi.x0, candidate.roi.y0,
                    candidate.roi.x0 + static_cast<int>(candidate.roi.pixels.cols()) - 1,
                    candidate.roi.y0 + static_cast<int>(candidate.roi.pixels.rows()) - 1};
    detections.push_back(det);
  }
  return detections;
}

std::vector<Detection2D> run_cb_slice(const SliceU16& slice, const PipelineParams& params,
                                      const MlpModel& model, double threshold, int slice_index) {
  return cb_from_stages(compute_slice_stages(slice, params), params, model, threshold,
                        slice_index);
}

std::vector<LabeledSample> build_training_pool(
    const std::vector<CtVolume>& volumes,
    const std::vector<std::vector<GroundTruthLesion>>& truths, const PipelineParams& params) {
  if (volumes.size() != truths.size())
    throw std::invalid_argument("build_training_pool: one truth list per volume required");
  params.validate();

  std::vector<LabeledSample> pool;
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    const CtVolume& volume = volumes[v];
    const double s = volume.spacing.in_plane_mm;
    for (int k = 0; k < volume.n_slices(); ++k) {
      for (const Candidate& candidate : detect_candidates(volume.slices[k], params)) {
        const Eigen::Vector3d pos{(candidate.blob.centroid.x() + 0.5) * s,
                                  (candidate.blob.centroid.y() + 0.5) * s,
                                  k * volume.spacing.slice_thickness_mm};
        bool is_lesion = false;
        for (const GroundTruthLesion& t : truths[v]) {
          const double radius = std::max(params.match_radius_floor_mm, t.diameter_mm / 2.0);
          if ((pos - t.centroid_mm).norm() <= radius) {
            is_lesion = true;
            break;
          }
        }
        LabeledSample sample;
        sample.features = extract_feature_vector(candidate.roi, params.glcm_levels);
        sample.label = is_lesion ? RoiLabel::Lesion : RoiLabel::Normal;
        pool.push_back(std::move(sample));
      }
    }
  }
  if (pool.empty())
    throw DegenerateInputError("build_training_pool: no candidates in any volume");
  return pool;
}

PoolSummary summarize_pool(const std::vector<LabeledSample>& pool) {
  PoolSummary summary;
  for (const auto& sample : pool)
    (sample.label == RoiLabel::Lesion ? summary.lesion_samples : summary.normal_samples) += 1;
  return summary;
}

}  // namespace mandcad
