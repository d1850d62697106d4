#include "mandcad/volume_io.hpp"

#include <cstdio>
#include <memory>
#include <system_error>

namespace mandcad {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

double mm_to_px(double length_mm, const VoxelSpacing& spacing) {
  if (length_mm < 0.0) throw std::invalid_argument("mm_to_px: length must be non-negative");
  spacing.validate();
  return length_mm / spacing.in_plane_mm;
}

CtVolume load_raw_volume(const std::filesystem::path& path, int width, int height, int n_slices,
                         const VoxelSpacing& spacing, std::string patient_id) {
  if (width < 1 || height < 1 || n_slices < 1)
    throw std::invalid_argument("load_raw_volume: dimensions must be positive");
  spacing.validate();

  std::error_code ec;
  const auto actual_size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat '" + path.string() + "': " + ec.message());

  const std::uintmax_t expected_size = static_cast<std::uintmax_t>(width) * height * n_slices * 2;
  if (actual_size != expected_size)
    throw FormatError("raw volume '" + path.string() + "': expected " +
                      std::to_string(expected_size) + " bytes for " + std::to_string(width) + "x" +
                      std::to_string(height) + "x" + std::to_string(n_slices) +
                      " u16, file holds " + std::to_string(actual_size));

  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");

  CtVolume volume;
  volume.spacing = spacing;
  volume.patient_id = std::move(patient_id);
  volume.slices.reserve(static_cast<std::size_t>(n_slices));

  const std::size_t slice_px = static_cast<std::size_t>(width) * height;
  std::vector<unsigned char> buf(slice_px * 2);
  for (int k = 0; k < n_slices; ++k) {
    if (std::fread(buf.data(), 1, buf.size(), f.get()) != buf.size())
      throw IoError("short read on '" + path.string() + "' at slice " + std::to_string(k));
    SliceU16 slice(height, width);
    std::uint16_t* dst = slice.data();
    for (std::size_t i = 0; i < slice_px; ++i)
      dst[i] = static_cast<std::uint16_t>(buf[2 * i] | (buf[2 * i + 1] << 8));
    volume.slices.push_back(std::move(slice));
  }
  return volume;
}

void save_raw_volume(const CtVolume& volume, const std::filesystem::path& path) {
  if (volume.slices.empty()) throw std::invalid_argument("save_raw_volume: empty volume");

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");

  const std::size_t slice_px = static_cast<std::size_t>(volume.width()) * volume.height();
  std::vector<unsigned char> buf(slice_px * 2);
  for (const SliceU16& slice : volume.slices) {
    const std::uint16_t* src = slice.data();
    for (std::size_t i = 0; i < slice_px; ++i) {
      buf[2 * i] = static_cast<unsigned char>(src[i] & 0xff);
      buf[2 * i + 1] = static_cast<unsigned char>(src[i] >> 8);
    }
    if (std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size())
      throw IoError("short write on '" + path.string() + "'");
  }
}

}  // namespace mandcad
