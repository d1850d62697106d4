#pragma once

#include "mandcad/imaging.hpp"
#include "mandcad/types.hpp"

namespace mandcad {

/// Intensity crop around a candidate blob: the blob bounding box expanded by
/// a margin and clamped to the slice. Coordinates are slice-relative.
struct Roi {
  SliceU8 pixels;
  int x0 = 0;
  int y0 = 0;
  Blob source_blob;
};

constexpr int kRoiMarginPx = 2;

Roi make_roi(const SliceU8& slice, const Blob& blob, int margin_px = kRoiMarginPx);

struct FirstOrderStats {
  double mean = 0;
  double stddev = 0;
  double skewness = 0;
  double kurtosis = 0;  // non-excess, m4 / m2^2
};

/// Population moments of the ROI gray levels. A flat ROI reports zero
/// skewness and kurtosis.
FirstOrderStats first_order_stats(const Roi& roi);

/// Symmetric gray-level co-occurrence matrix at horizontal distance 1.
/// Intensities are quantized into `levels` equal-width bins over [0, 255];
/// each neighbor pair (a, b) increments both (a, b) and (b, a); the result
/// sums to 1.
Eigen::MatrixXd glcm(const Roi& roi, int levels = 32);

struct HaralickFeatures {
  double contrast = 0;
  double homogeneity = 0;
  double energy = 0;
  double entropy = 0;  // natural log
};

/// Second-order statistics of a normalized co-occurrence matrix.
HaralickFeatures haralick_features(const Eigen::MatrixXd& glcm_matrix);

/// The seven Hu invariants of the intensity-weighted ROI.
Eigen::Matrix<double, 7, 1> hu_moments(const Roi& roi);

using FeatureVector = Eigen::Matrix<double, 15, 1>;

/// Fixed feature order: mean, stddev, skewness, kurtosis, contrast,
/// homogeneity, energy, entropy, hu1..hu7.
FeatureVector extract_feature_vector(const Roi& roi, int glcm_levels = 32);

}  // namespace mandcad
