#pragma once

#include "mandcad/types.hpp"

#include <filesystem>

namespace mandcad {

/// Loads a headerless 16-bit unsigned little-endian RAW volume.
/// Layout is slice-major, row-major within each slice. The file size must
/// equal width*height*n_slices*2 bytes exactly.
CtVolume load_raw_volume(const std::filesystem::path& path, int width, int height, int n_slices,
                         const VoxelSpacing& spacing, std::string patient_id = {});

/// Writes a volume in the same RAW layout. Reloading yields bit-identical pixels.
void save_raw_volume(const CtVolume& volume, const std::filesystem::path& path);

/// Converts a physical length to in-plane pixels.
double mm_to_px(double length_mm, const VoxelSpacing& spacing);

}  // namespace mandcad
