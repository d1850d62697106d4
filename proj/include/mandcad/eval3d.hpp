#pragma once

#include "mandcad/params.hpp"
#include "mandcad/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mandcad {

enum class LesionKind { CB, OB };

const char* to_string(LesionKind kind);
LesionKind lesion_kind_from_string(const std::string& text);

/// One per-slice finding from either pipeline. Coordinates are pixels in the
/// slice; physical position follows from VoxelSpacing (pixel centres sit at
/// (px + 0.5) * in_plane_mm, slice k lies in the plane z = k * thickness).
struct Detection2D {
  int slice_index = 0;
  Eigen::Vector2d centroid_px{0, 0};
  double equiv_diameter_mm = 0;
  double score = 1.0;  // MLP lesion score for CB; fixed 1.0 for OB
  LesionKind kind = LesionKind::CB;
  BBox roi_bbox;
};

/// 3D aggregate of linked per-slice detections.
struct LesionCluster {
  LesionKind kind = LesionKind::CB;
  int first_slice = 0;
  int last_slice = 0;
  Eigen::Vector3d centroid_mm{0, 0, 0};
  double mean_score = 0;
  int member_count = 0;
  double mean_diameter_mm = 0;
};

struct GroundTruthLesion {
  Eigen::Vector3d centroid_mm{0, 0, 0};
  double diameter_mm = 0;
  LesionKind kind = LesionKind::CB;
  std::string patient_id;
};

/// Links detections of the same kind across same or adjacent slices whenever
/// their in-plane centroid distance is within link_radius_mm, transitively.
/// Clusters with fewer than min_persistence members are dropped.
std::vector<LesionCluster> cluster_detections(const std::vector<Detection2D>& detections,
                                              const VoxelSpacing& spacing,
                                              double link_radius_mm = 5.0,
                                              int min_persistence = 5);

struct MatchCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

/// Greedy one-to-one matching by ascending 3D centroid distance; a pair may
/// match iff the distance is <= max(match_radius_floor_mm, diameter/2).
/// Deterministic under permutation of the cluster list.
MatchCounts match(const std::vector<LesionCluster>& clusters,
                  const std::vector<GroundTruthLesion>& truths,
                  double match_radius_floor_mm = 5.0);

/// Per-patient evaluation record feeding the cohort metrics.
struct PatientEval {
  std::string patient_id;
  MatchCounts counts;
  int n_truths = 0;
};

/// Sum TP / (sum TP + sum FN) over patients. Undefined without any
/// ground-truth lesion.
double sensitivity(const std::vector<PatientEval>& patients);

struct FpStats {
  double mean_fp = 0;                 // sum FP / n_patients
  std::optional<double> patient_rate; // patients with a FP / patients without any true lesion
};

FpStats fp_per_patient(const std::vector<PatientEval>& patients);

struct FrocPoint {
  double threshold = 0;
  double sensitivity = 0;
  double fp_per_patient = 0;  // mean FP
  std::optional<double> patient_rate;
};

/// One operating point per sweep entry, sorted by ascending mean FP.
std::vector<FrocPoint> froc_curve(
    const std::vector<std::pair<double, std::vector<PatientEval>>>& sweep);

/// Suppresses OB clusters lying within max(floor, cb_diameter/2) of a CB
/// cluster; the rule-based pipeline re-reports classifier-confirmed holes,
/// and the CB marking wins.
std::vector<LesionCluster> suppress_ob_overlapping_cb(std::vector<LesionCluster> clusters,
                                                      double match_radius_floor_mm = 5.0);

// Ground-truth files are whitespace-delimited text, one lesion per line:
//   patient_id kind x_mm y_mm z_mm diameter_mm
// with '#' comments. FROC files are written as
//   threshold sensitivity mean_fp patient_rate
// where an undefined patient rate prints as '-'.
std::vector<GroundTruthLesion> read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::vector<GroundTruthLesion>& truths,
                        const std::filesystem::path& path);
void write_froc(const std::vector<FrocPoint>& curve, const std::filesystem::path& path);

}  // namespace mandcad
