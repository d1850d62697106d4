#pragma once

#include "mandcad/types.hpp"

#include <utility>
#include <vector>

namespace mandcad {

/// Linear contrast stretch of a 16-bit slice onto [0, 255].
/// out = round_half_up(255 * (in - min) / (max - min)); a constant slice
/// maps to all zeros.
SliceU8 normalize_slice(const SliceU16& slice);

/// Maximum-entropy (Kapur) threshold of an 8-bit image.
///
/// Returns the t in [0, 255] maximizing H_bg(t) + H_fg(t), where each term is
/// the Shannon entropy (natural log) of the class-conditional histogram over
/// [0, t] and [t+1, 255]. Thresholds leaving either class empty are excluded;
/// ties break toward the smallest t. Throws DegenerateInputError on a
/// constant image.
int kapur_threshold(const SliceU8& image);

/// mask(y, x) = pixel(y, x) > threshold. Threshold must be in [0, 255].
MaskImage binarize(const SliceU8& image, int threshold);

/// Discrete disk of offsets with dx^2 + dy^2 <= radius_px^2.
struct StructuringElement {
  int radius_px = 1;
  std::vector<std::pair<int, int>> offsets;  // (dx, dy), contains (0,0), symmetric
};

StructuringElement make_disk_se(int radius_px);

/// Disk SE sized so closing with it fills any hole of equivalent diameter
/// <= diameter_mm: radius_px = ceil(mm_to_px(diameter_mm) / 2).
StructuringElement fill_se_for_diameter(double diameter_mm, const VoxelSpacing& spacing);

// Morphology treats everything outside the image as background, i.e. the
// mask is a finite subset of the plane. Closing is computed on an internally
// padded canvas so the result equals the whole-plane closing restricted to
// the image window; this keeps it extensive, idempotent and monotone.
MaskImage dilate(const MaskImage& image, const StructuringElement& se);
MaskImage erode(const MaskImage& image, const StructuringElement& se);
MaskImage morph_close(const MaskImage& image, const StructuringElement& se);

enum class Polarity { Foreground, Background };

/// 8-connected region of matching pixels.
struct Blob {
  int label = 0;
  long area_px = 0;
  Eigen::Vector2d centroid{0, 0};  // (x, y), arithmetic mean of member pixels
  BBox bbox;
  std::vector<std::pair<int, int>> pixel_list;  // (x, y)
};

/// 8-connected labeling of pixels matching the polarity, sorted by
/// descending area (ties keep scan order).
std::vector<Blob> connected_components(const MaskImage& image, Polarity polarity);

/// Background components not 8-connected to the image border, i.e. enclosed
/// dark regions.
std::vector<Blob> extract_holes(const MaskImage& image);

/// Equivalent circular diameter from area: 2 * sqrt(area * s^2 / pi).
double equivalent_diameter_mm(const Blob& blob, const VoxelSpacing& spacing);

/// Drops blobs with centroid y strictly below 2/3 of the image height
/// (y grows downward); order is preserved.
std::vector<Blob> reject_lower_third(std::vector<Blob> blobs, int image_height);

namespace detail {

/// Squared Euclidean distance to the nearest true pixel; pixels outside the
/// image are ignored as sources. Entries with no source anywhere get a value
/// larger than any in-image squared distance.
Image<std::int32_t> squared_distance_to_foreground(const MaskImage& mask);

}  // namespace detail

}  // namespace mandcad
