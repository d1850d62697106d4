#include "mandcad/volume_io.hpp"

#include "mandcad/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace mandcad;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST_CASE("mm_to_px applies the in-plane spacing") {
  const VoxelSpacing s{0.2, 0.2};
  CHECK(mm_to_px(5.0, s) == doctest::Approx(25.0));
  CHECK(mm_to_px(0.0, s) == 0.0);
  CHECK(mm_to_px(30.0, s) == doctest::Approx(150.0));
  CHECK_THROWS_AS(mm_to_px(-1.0, s), std::invalid_argument);
}

TEST_CASE("load_raw_volume decodes little-endian u16 in slice/row order") {
  const auto path = temp_file("mandcad_le.raw");
  {
    std::ofstream out(path, std::ios::binary);
    const unsigned char bytes[] = {0x01, 0x00, 0x00, 0x01, 0xFF, 0xFF, 0x00, 0x00};
    out.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
  }
  const CtVolume v = load_raw_volume(path, 2, 2, 1, {});
  REQUIRE(v.n_slices() == 1);
  CHECK(v.slices[0](0, 0) == 1);
  CHECK(v.slices[0](0, 1) == 256);
  CHECK(v.slices[0](1, 0) == 65535);
  CHECK(v.slices[0](1, 1) == 0);
  fs::remove(path);
}

TEST_CASE("load_raw_volume rejects size mismatches with both byte counts") {
  const auto path = temp_file("mandcad_short.raw");
  {
    std::ofstream out(path, std::ios::binary);
    const std::vector<char> bytes(2 * 2 * 9 * 2, 0);  // 9 slices' worth
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    load_raw_volume(path, 2, 2, 10, {});
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("80") != std::string::npos);  // expected bytes
    CHECK(msg.find("72") != std::string::npos);  // actual bytes
  }
  fs::remove(path);
  CHECK_THROWS_AS(load_raw_volume(path, 2, 2, 1, {}), IoError);  // file gone
}

TEST_CASE("raw round-trip is bit identical and offsets are slice-major") {
  Rng rng(7);
  CtVolume v;
  v.spacing = {0.2, 0.2};
  v.patient_id = "rt";
  for (int k = 0; k < 3; ++k) {
    SliceU16 s(4, 5);
    for (Eigen::Index i = 0; i < s.size(); ++i)
      s.data()[i] = static_cast<std::uint16_t>(rng.index(65536));
    v.slices.push_back(s);
  }
  const auto path = temp_file("mandcad_rt.raw");
  save_raw_volume(v, path);

  const CtVolume back = load_raw_volume(path, 5, 4, 3, v.spacing);
  REQUIRE(back.n_slices() == 3);
  for (int k = 0; k < 3; ++k) CHECK((back.slices[k] == v.slices[k]).all());

  // Slice k starts at byte offset k*width*height*2.
  std::ifstream in(path, std::ios::binary);
  in.seekg(2 * 5 * 4 * 2);
  unsigned char lo = 0, hi = 0;
  in.read(reinterpret_cast<char*>(&lo), 1);
  in.read(reinterpret_cast<char*>(&hi), 1);
  CHECK((lo | hi << 8) == v.slices[2](0, 0));
  fs::remove(path);
}

TEST_CASE("paper-scale geometry: 512x512x495 needs 259522560 bytes") {
  // Checked arithmetically; allocating a quarter-gigabyte here is pointless.
  CHECK(static_cast<std::uintmax_t>(512) * 512 * 495 * 2 == 259522560ULL);
}
