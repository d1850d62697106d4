#include "mandcad/imaging.hpp"

#include "mandcad/rng.hpp"
#include "mandcad/volume_io.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace mandcad;

namespace {

SliceU8 image_from_histogram(const std::array<std::int64_t, 256>& hist) {
  std::int64_t total = 0;
  for (auto c : hist) total += c;
  SliceU8 img(1, total);
  Eigen::Index pos = 0;
  for (int v = 0; v < 256; ++v)
    for (std::int64_t c = 0; c < hist[v]; ++c) img(0, pos++) = static_cast<std::uint8_t>(v);
  return img;
}

MaskImage random_mask(Rng& rng, int h, int w, double density) {
  MaskImage m(h, w);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() < density;
  return m;
}

}  // namespace

TEST_CASE("normalize_slice maps min to 0, max to 255, rounds half up") {
  SliceU16 s(1, 3);
  s << 100, 600, 1100;
  const SliceU8 n = normalize_slice(s);
  CHECK(n(0, 0) == 0);
  CHECK(n(0, 1) == 128);  // 255 * 500/1000 = 127.5 rounds up
  CHECK(n(0, 2) == 255);
}

TEST_CASE("normalize_slice maps constant slices to zero") {
  SliceU16 s(4, 4);
  s.setConstant(4000);
  CHECK((normalize_slice(s) == 0).all());
}

TEST_CASE("normalize_slice is order-preserving") {
  Rng rng(11);
  SliceU16 s(16, 16);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    s.data()[i] = static_cast<std::uint16_t>(rng.index(65536));
  const SliceU8 n = normalize_slice(s);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index j = 0; j < s.size(); j += 37)
      if (s.data()[i] <= s.data()[j]) CHECK(n.data()[i] <= n.data()[j]);
}

TEST_CASE("kapur_threshold on the two-spike histogram picks the first valid split") {
  std::array<std::int64_t, 256> hist{};
  hist[10] = 500;
  hist[200] = 500;
  const SliceU8 img = image_from_histogram(hist);
  const int t = kapur_threshold(img);
  CHECK(t == oracles::kapur_exhaustive(hist));
  CHECK(t == 10);  // all splits in [10,199] tie at zero entropy; smallest wins
  // Binarizing at it leaves exactly the 200-valued pixels as foreground.
  const MaskImage mask = binarize(img, t);
  CHECK(mask.count() == 500);
}

TEST_CASE("kapur_threshold on a uniform histogram matches the oracle") {
  std::array<std::int64_t, 256> hist{};
  hist.fill(4);
  const SliceU8 img = image_from_histogram(hist);
  const int t = kapur_threshold(img);
  CHECK(t == oracles::kapur_exhaustive(hist));
  CHECK(t == 127);  // frozen from the oracle: a balanced split maximizes the sum
}

TEST_CASE("kapur_threshold rejects constant images") {
  SliceU8 img(8, 8);
  img.setConstant(42);
  CHECK_THROWS_AS(kapur_threshold(img), DegenerateInputError);
}

TEST_CASE("kapur_threshold equals the exhaustive oracle on random histograms") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::array<std::int64_t, 256> hist{};
    const int modes = 1 + static_cast<int>(rng.index(4));
    for (int m = 0; m < modes; ++m) {
      const int center = static_cast<int>(rng.index(256));
      const int width = 1 + static_cast<int>(rng.index(40));
      const int mass = 50 + static_cast<int>(rng.index(2000));
      for (int i = 0; i < mass; ++i) {
        const int v = center + static_cast<int>(rng.index(2 * width + 1)) - width;
        if (v >= 0 && v < 256) ++hist[v];
      }
    }
    std::int64_t total = 0;
    for (auto c : hist) total += c;
    if (total == 0) continue;
    int distinct = 0;
    for (auto c : hist) distinct += (c > 0);
    if (distinct < 2) continue;
    const SliceU8 img = image_from_histogram(hist);
    CHECK(kapur_threshold(img) == oracles::kapur_exhaustive(hist));
  }
}

TEST_CASE("binarize thresholds strictly above") {
  SliceU8 img(2, 2);
  img << 0, 255, 255, 0;
  CHECK(binarize(img, 255).count() == 0);
  CHECK(binarize(img, 0).count() == 2);
  CHECK_THROWS_AS(binarize(img, 256), std::invalid_argument);
}

TEST_CASE("fill_se_for_diameter sizes the disk from the physical diameter") {
  const VoxelSpacing s{0.2, 0.2};
  CHECK(fill_se_for_diameter(5.0, s).radius_px == 13);
  CHECK(fill_se_for_diameter(30.0, s).radius_px == 75);
  CHECK(fill_se_for_diameter(0.1, s).radius_px == 1);
  CHECK_THROWS_AS(fill_se_for_diameter(0.0, s), std::invalid_argument);
}

TEST_CASE("disk SE contains the origin and is symmetric") {
  for (int r : {1, 2, 5, 9}) {
    const StructuringElement se = make_disk_se(r);
    bool has_origin = false;
    for (const auto& [dx, dy] : se.offsets) {
      if (dx == 0 && dy == 0) has_origin = true;
      bool has_neg = false;
      for (const auto& [ex, ey] : se.offsets)
        if (ex == -dx && ey == -dy) has_neg = true;
      CHECK(has_neg);
      CHECK(dx * dx + dy * dy <= r * r);
    }
    CHECK(has_origin);
  }
}

TEST_CASE("dilate and erode match direct offset enumeration") {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const int r = 1 + static_cast<int>(rng.index(4));
    const StructuringElement se = make_disk_se(r);
    const MaskImage a = random_mask(rng, 24, 31, 0.2 + 0.5 * rng.uniform());
    CHECK((dilate(a, se) == oracles::dilate_naive(a, se)).all());
    CHECK((erode(a, se) == oracles::erode_naive(a, se)).all());
  }
}

TEST_CASE("morph_close matches the naive whole-plane closing") {
  Rng rng(6);
  for (int trial = 0; trial < 25; ++trial) {
    const int r = 1 + static_cast<int>(rng.index(4));
    const StructuringElement se = make_disk_se(r);
    const MaskImage a = random_mask(rng, 22, 27, 0.3 + 0.4 * rng.uniform());
    CHECK((morph_close(a, se) == oracles::close_naive(a, se)).all());
  }
}

TEST_CASE("closing fills holes below the SE size and keeps larger ones") {
  const VoxelSpacing s{0.2, 0.2};
  const StructuringElement se = fill_se_for_diameter(5.0, s);  // fills up to ~5mm

  auto square_with_hole = [&](double hole_mm) {
    MaskImage img(160, 160);
    img.setConstant(true);
    const double r_px = mm_to_px(hole_mm, s) / 2.0;
    for (int y = 0; y < 160; ++y)
      for (int x = 0; x < 160; ++x)
        if ((x - 80.0) * (x - 80.0) + (y - 80.0) * (y - 80.0) <= r_px * r_px) img(y, x) = false;
    return img;
  };

  CHECK((morph_close(square_with_hole(3.0), se) == true).all());
  const MaskImage kept = morph_close(square_with_hole(8.0), se);
  CHECK(!(kept == true).all());
  CHECK(kept(80, 80) == false);
}

TEST_CASE("closing is idempotent, extensive and monotone on random masks") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int r = 1 + static_cast<int>(rng.index(5));
    const StructuringElement se = make_disk_se(r);
    const MaskImage a = random_mask(rng, 32, 32, 0.25 + 0.4 * rng.uniform());
    const MaskImage ca = morph_close(a, se);
    CHECK((morph_close(ca, se) == ca).all());  // idempotent
    CHECK((a && !ca).count() == 0);            // extensive

    MaskImage b = a;
    for (int extra = 0; extra < 40; ++extra)
      b(rng.index(32), rng.index(32)) = true;  // a subset of b
    const MaskImage cb = morph_close(b, se);
    CHECK((ca && !cb).count() == 0);  // monotone
  }
}

TEST_CASE("connected_components finds 8-connected blobs sorted by area") {
  MaskImage img(20, 30);
  img.setConstant(false);
  img.block(2, 2, 10, 10).setConstant(true);
  img.block(2, 17, 10, 10).setConstant(true);
  auto blobs = connected_components(img, Polarity::Foreground);
  REQUIRE(blobs.size() == 2);
  CHECK(blobs[0].area_px == 100);
  CHECK(blobs[1].area_px == 100);
  CHECK(blobs[0].centroid.x() == doctest::Approx(6.5));
  CHECK(blobs[0].centroid.y() == doctest::Approx(6.5));
  CHECK(blobs[0].bbox.x_min == 2);
  CHECK(blobs[0].bbox.x_max == 11);

  MaskImage empty(5, 5);
  empty.setConstant(false);
  CHECK(connected_components(empty, Polarity::Foreground).empty());

  MaskImage diag(4, 4);
  diag.setConstant(false);
  diag(0, 0) = diag(1, 1) = diag(2, 2) = true;
  CHECK(connected_components(diag, Polarity::Foreground).size() == 1);
}

TEST_CASE("sum of foreground blob areas equals the foreground count") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const MaskImage a = random_mask(rng, 40, 40, rng.uniform());
    long total = 0;
    for (const auto& b : connected_components(a, Polarity::Foreground)) total += b.area_px;
    CHECK(total == a.count());
  }
}

TEST_CASE("extract_holes keeps only enclosed background") {
  MaskImage ring(21, 21);
  ring.setConstant(false);
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) {
      const double d = std::hypot(x - 10.0, y - 10.0);
      if (d >= 5.0 && d <= 9.0) ring(y, x) = true;
    }
  auto holes = extract_holes(ring);
  REQUIRE(holes.size() == 1);
  CHECK(holes[0].centroid.x() == doctest::Approx(10.0));
  CHECK(holes[0].centroid.y() == doctest::Approx(10.0));

  // A dark region touching the border is not a hole.
  MaskImage open_region(10, 10);
  open_region.setConstant(true);
  open_region.block(0, 3, 5, 3).setConstant(false);
  CHECK(extract_holes(open_region).empty());

  // Two rings, two holes.
  MaskImage two(21, 43);
  two.setConstant(false);
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) {
      const double d = std::hypot(x - 10.0, y - 10.0);
      if (d >= 5.0 && d <= 9.0) {
        two(y, x) = true;
        two(y, x + 22) = true;
      }
    }
  auto pair = extract_holes(two);
  REQUIRE(pair.size() == 2);
  CHECK(std::abs(pair[0].centroid.x() - pair[1].centroid.x()) == doctest::Approx(22.0));
}

TEST_CASE("holes are disjoint from foreground and never border-reachable") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    MaskImage a = random_mask(rng, 36, 36, 0.55);
    const StructuringElement se = make_disk_se(2);
    a = morph_close(a, se);
    for (const auto& hole : extract_holes(a))
      for (const auto& [x, y] : hole.pixel_list) {
        CHECK(!a(y, x));
        CHECK(x > 0);
        CHECK(x < 35);
        CHECK(y > 0);
        CHECK(y < 35);
      }
  }
}

TEST_CASE("equivalent_diameter_mm follows the area formula") {
  const VoxelSpacing s{0.2, 0.2};
  Blob b;
  b.area_px = 100;
  CHECK(equivalent_diameter_mm(b, s) == doctest::Approx(2.0 * std::sqrt(4.0 / M_PI)));
  b.area_px = 1;
  CHECK(equivalent_diameter_mm(b, s) == doctest::Approx(0.22568).epsilon(1e-3));

  // Rasterized disk of radius 25 px: the formula recovers ~10 mm within 3%.
  long area = 0;
  for (int y = -30; y <= 30; ++y)
    for (int x = -30; x <= 30; ++x)
      if (x * x + y * y <= 25 * 25) ++area;
  b.area_px = area;
  CHECK(equivalent_diameter_mm(b, s) == doctest::Approx(10.0).epsilon(0.03));
}

TEST_CASE("reject_lower_third keeps centroids at or above the cut") {
  const int height = 300;
  auto blob_at = [](double y) {
    Blob b;
    b.area_px = 1;
    b.centroid = {10.0, y};
    return b;
  };
  const std::vector<Blob> blobs = {blob_at(150.0), blob_at(270.0), blob_at(200.0)};
  const auto kept = reject_lower_third(blobs, height);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].centroid.y() == 150.0);
  CHECK(kept[1].centroid.y() == 200.0);  // exactly 2/3: kept, order preserved
  CHECK_THROWS_AS(reject_lower_third(blobs, 2), std::invalid_argument);
}
