#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mandcad {

/// Dense row-major image; element (y, x) is accessed as img(y, x).
/// Row-major storage matches the raw on-disk pixel order.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using SliceU16 = Image<std::uint16_t>;  ///< source CT slice, 16-bit grayscale
using SliceU8 = Image<std::uint8_t>;    ///< contrast-normalized slice
using MaskImage = Image<bool>;          ///< binary mask, true = foreground

/// Physical voxel calibration. In-plane spacing is isotropic.
struct VoxelSpacing {
  double in_plane_mm = 0.2;
  double slice_thickness_mm = 0.2;

  void validate() const {
    if (in_plane_mm <= 0.0 || slice_thickness_mm <= 0.0)
      throw std::invalid_argument("VoxelSpacing: spacings must be positive");
  }
};

/// Ordered stack of same-sized 16-bit slices with physical calibration.
struct CtVolume {
  std::vector<SliceU16> slices;
  VoxelSpacing spacing;
  std::string patient_id;

  int width() const { return slices.empty() ? 0 : static_cast<int>(slices.front().cols()); }
  int height() const { return slices.empty() ? 0 : static_cast<int>(slices.front().rows()); }
  int n_slices() const { return static_cast<int>(slices.size()); }
};

/// Inclusive pixel rectangle.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = -1;
  int y_max = -1;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

// Error categories. The CLI maps IoError to exit code 1 and everything
// else thrown by the library to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace mandcad
