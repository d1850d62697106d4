#pragma once

#include "mandcad/eval3d.hpp"
#include "mandcad/features.hpp"
#include "mandcad/mlp.hpp"
#include "mandcad/params.hpp"

#include <vector>

namespace mandcad {

/// Shared front end of both pipelines for one slice: contrast
/// normalization, entropy threshold, binarization and the 5 mm denoising
/// closing. A constant slice has no threshold and an empty mask.
struct SliceStages {
  SliceU8 normalized;
  int threshold = -1;  // -1 when the slice is constant
  MaskImage binary;
  MaskImage closed;
};

SliceStages compute_slice_stages(const SliceU16& slice, const PipelineParams& params);

struct Candidate {
  Blob blob;
  Roi roi;
};

/// Candidate stage: enclosed holes of the denoised mask wider than the
/// candidate threshold, outside the bottom third, with their intensity ROIs.
std::vector<Candidate> detect_candidates(const SliceU16& slice, const PipelineParams& params);
std::vector<Candidate> candidates_from_stages(const SliceStages& stages,
                                              const PipelineParams& params);

/// Full close-border detection for one slice: candidates, features, MLP.
/// Emits one detection per candidate whose lesion score clears the
/// threshold.
std::vector<Detection2D> run_cb_slice(const SliceU16& slice, const PipelineParams& params,
                                      const MlpModel& model, double threshold, int slice_index = 0);
std::vector<Detection2D> cb_from_stages(const SliceStages& stages, const PipelineParams& params,
                                        const MlpModel& model, double threshold, int slice_index);

/// Runs the candidate stage over whole volumes and labels each candidate by
/// geometric overlap with the ground truth (the 3D match rule applied to the
/// candidate's slice position). Throws when no volume yields any candidate.
std::vector<LabeledSample> build_training_pool(
    const std::vector<CtVolume>& volumes,
    const std::vector<std::vector<GroundTruthLesion>>& truths, const PipelineParams& params);

struct PoolSummary {
  std::size_t lesion_samples = 0;
  std::size_t normal_samples = 0;
};

PoolSummary summarize_pool(const std::vector<LabeledSample>& pool);

}  // namespace mandcad
