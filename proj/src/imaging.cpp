#include "mandcad/imaging.hpp"

#include "mandcad/volume_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace mandcad {

SliceU8 normalize_slice(const SliceU16& slice) {
  const std::uint16_t lo = slice.minCoeff();
  const std::uint16_t hi = slice.maxCoeff();
  SliceU8 out(slice.rows(), slice.cols());
  if (hi == lo) {
    out.setZero();
    return out;
  }
  const double scale = 255.0 / (hi - lo);
  const std::uint16_t* src = slice.data();
  std::uint8_t* dst = out.data();
  const std::size_t n = static_cast<std::size_t>(slice.size());
  for (std::size_t i = 0; i < n; ++i)
    dst[i] = static_cast<std::uint8_t>(std::floor((src[i] - lo) * scale + 0.5));
  return out;
}

int kapur_threshold(const SliceU8& image) {
  std::array<std::int64_t, 256> hist{};
  const std::uint8_t* px = image.data();
  const std::size_t n = static_cast<std::size_t>(image.size());
  for (std::size_t i = 0; i < n; ++i) ++hist[px[i]];

  int distinct = 0;
  for (auto c : hist) distinct += (c > 0);
  if (distinct < 2) throw DegenerateInputError("kapur_threshold: constant image");

  const double total = static_cast<double>(n);
  std::array<double, 256> p{};
  for (int i = 0; i < 256; ++i) p[i] = hist[i] / total;

  // Direct evaluation of both class-conditional entropies per threshold.
  // 256^2 terms; cheap next to the image scan above.
  int best_t = -1;
  double best_obj = -std::numeric_limits<double>::infinity();
  std::int64_t count_below = 0;
  std::array<double, 257> cum{};
  for (int i = 0; i < 256; ++i) cum[i + 1] = cum[i] + p[i];
  for (int t = 0; t < 256; ++t) {
    count_below += hist[t];
    if (count_below == 0 || count_below == static_cast<std::int64_t>(n)) continue;
    const double pb = cum[t + 1];
    const double pf = 1.0 - pb;
    double hb = 0.0;
    for (int i = 0; i <= t; ++i)
      if (p[i] > 0.0) {
        const double q = p[i] / pb;
        hb -= q * std::log(q);
      }
    double hf = 0.0;
    for (int i = t + 1; i < 256; ++i)
      if (p[i] > 0.0) {
        const double q = p[i] / pf;
        hf -= q * std::log(q);
      }
    if (hb + hf > best_obj) {
      best_obj = hb + hf;
      best_t = t;
    }
  }
  return best_t;
}

MaskImage binarize(const SliceU8& image, int threshold) {
  if (threshold < 0 || threshold > 255)
    throw std::invalid_argument("binarize: threshold outside [0, 255]");
  return image > static_cast<std::uint8_t>(threshold);
}

StructuringElement make_disk_se(int radius_px) {
  if (radius_px < 1) throw std::invalid_argument("make_disk_se: radius must be >= 1");
  StructuringElement se;
  se.radius_px = radius_px;
  const int r2 = radius_px * radius_px;
  for (int dy = -radius_px; dy <= radius_px; ++dy)
    for (int dx = -radius_px; dx <= radius_px; ++dx)
      if (dx * dx + dy * dy <= r2) se.offsets.emplace_back(dx, dy);
  return se;
}

StructuringElement fill_se_for_diameter(double diameter_mm, const VoxelSpacing& spacing) {
  if (diameter_mm <= 0.0) throw std::invalid_argument("fill_se_for_diameter: diameter must be > 0");
  const int radius = static_cast<int>(std::ceil(mm_to_px(diameter_mm, spacing) / 2.0));
  if (radius < 1) throw std::invalid_argument("fill_se_for_diameter: radius under one pixel");
  return make_disk_se(radius);
}

namespace detail {

namespace {

constexpr std::int32_t kInf = std::numeric_limits<std::int32_t>::max() / 4;

// Felzenszwalb-Huttenlocher lower envelope over one row of column distances.
// f holds squared vertical distances; d receives min_x' ((x-x')^2 + f[x']).
// Columns without any source (f = kInf) never enter the envelope.
void envelope_pass(const std::int32_t* f, std::int32_t* d, int n, int* v, double* z) {
  auto intersect = [&](int q, int p) {
    return (static_cast<double>(f[q]) + static_cast<double>(q) * q -
            (static_cast<double>(f[p]) + static_cast<double>(p) * p)) /
           (2.0 * q - 2.0 * p);
  };

  int first = 0;
  while (first < n && f[first] >= kInf) ++first;
  if (first == n) {
    std::fill(d, d + n, kInf);
    return;
  }

  int k = 0;
  v[0] = first;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = first + 1; q < n; ++q) {
    if (f[q] >= kInf) continue;
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }

  int kk = 0;
  for (int q = 0; q < n; ++q) {
    while (z[kk + 1] < q) ++kk;
    const int vk = v[kk];
    const std::int64_t dx = q - vk;
    const std::int64_t val = dx * dx + f[vk];
    d[q] = static_cast<std::int32_t>(std::min<std::int64_t>(val, kInf));
  }
}

}  // namespace

Image<std::int32_t> squared_distance_to_foreground(const MaskImage& mask) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  Image<std::int32_t> g(h, w);

  // Vertical pass: per column, distance to nearest source row.
  for (int x = 0; x < w; ++x) {
    std::int32_t dist = kInf;
    for (int y = 0; y < h; ++y) {
      dist = mask(y, x) ? 0 : (dist >= kInf ? kInf : dist + 1);
      g(y, x) = dist;
    }
    dist = kInf;
    for (int y = h - 1; y >= 0; --y) {
      dist = mask(y, x) ? 0 : (dist >= kInf ? kInf : dist + 1);
      g(y, x) = std::min(g(y, x), dist);
    }
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::int64_t v = g(y, x);
      g(y, x) = static_cast<std::int32_t>(std::min<std::int64_t>(v * v, kInf));
    }

  // Horizontal pass: lower envelope per row.
  Image<std::int32_t> out(h, w);
  std::vector<std::int32_t> row(static_cast<std::size_t>(w));
  std::vector<int> v(static_cast<std::size_t>(w));
  std::vector<double> z(static_cast<std::size_t>(w) + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) row[static_cast<std::size_t>(x)] = g(y, x);
    envelope_pass(row.data(), &out(y, 0), w, v.data(), z.data());
  }
  return out;
}

}  // namespace detail

namespace {

// Dilation within the given canvas: p is set iff some source lies within
// radius. Out-of-canvas never contributes sources.
MaskImage dilate_in_place_canvas(const MaskImage& image, int radius) {
  const auto d2 = detail::squared_distance_to_foreground(image);
  return d2 <= radius * radius;
}

// Erosion where everything outside the canvas counts as background.
MaskImage erode_in_canvas(const MaskImage& image, int radius) {
  const auto d2 = detail::squared_distance_to_foreground(!image);
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());
  const int r2 = radius * radius;
  MaskImage out(h, w);
  for (int y = 0; y < h; ++y) {
    const int dy_edge = std::min(y + 1, h - y);
    for (int x = 0; x < w; ++x) {
      const int dx_edge = std::min(x + 1, w - x);
      const int edge = std::min(dx_edge, dy_edge);
      out(y, x) = d2(y, x) > r2 && static_cast<std::int64_t>(edge) * edge > r2;
    }
  }
  return out;
}

MaskImage pad_mask(const MaskImage& image, int margin) {
  MaskImage padded(image.rows() + 2 * margin, image.cols() + 2 * margin);
  padded.setConstant(false);
  padded.block(margin, margin, image.rows(), image.cols()) = image;
  return padded;
}

}  // namespace

MaskImage dilate(const MaskImage& image, const StructuringElement& se) {
  return dilate_in_place_canvas(image, se.radius_px);
}

MaskImage erode(const MaskImage& image, const StructuringElement& se) {
  return erode_in_canvas(image, se.radius_px);
}

MaskImage morph_close(const MaskImage& image, const StructuringElement& se) {
  const int r = se.radius_px;
  // The dilation spills up to r pixels past the window and those pixels feed
  // the erosion, so both run on a canvas padded by r.
  const MaskImage padded = pad_mask(image, r);
  const MaskImage dil = dilate_in_place_canvas(padded, r);
  const MaskImage ero = erode_in_canvas(dil, r);
  return ero.block(r, r, image.rows(), image.cols());
}

namespace {

std::vector<Blob> label_components(const MaskImage& match, const MaskImage* exclude = nullptr) {
  const int h = static_cast<int>(match.rows());
  const int w = static_cast<int>(match.cols());
  Image<std::int32_t> labels(h, w);
  labels.setZero();

  std::vector<Blob> blobs;
  std::vector<std::pair<int, int>> stack;
  int next_label = 0;

  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      if (!match(y0, x0) || labels(y0, x0) != 0) continue;
      if (exclude && (*exclude)(y0, x0)) continue;
      Blob blob;
      blob.label = ++next_label;
      blob.bbox = {x0, y0, x0, y0};
      labels(y0, x0) = blob.label;
      stack.clear();
      stack.emplace_back(x0, y0);
      std::int64_t sum_x = 0, sum_y = 0;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        blob.pixel_list.emplace_back(x, y);
        sum_x += x;
        sum_y += y;
        blob.bbox.x_min = std::min(blob.bbox.x_min, x);
        blob.bbox.x_max = std::max(blob.bbox.x_max, x);
        blob.bbox.y_min = std::min(blob.bbox.y_min, y);
        blob.bbox.y_max = std::max(blob.bbox.y_max, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            if (!match(ny, nx) || labels(ny, nx) != 0) continue;
            if (exclude && (*exclude)(ny, nx)) continue;
            labels(ny, nx) = blob.label;
            stack.emplace_back(nx, ny);
          }
      }
      blob.area_px = static_cast<long>(blob.pixel_list.size());
      blob.centroid = {static_cast<double>(sum_x) / blob.area_px,
                       static_cast<double>(sum_y) / blob.area_px};
      blobs.push_back(std::move(blob));
    }

  std::stable_sort(blobs.begin(), blobs.end(),
                   [](const Blob& a, const Blob& b) { return a.area_px > b.area_px; });
  return blobs;
}

}  // namespace

std::vector<Blob> connected_components(const MaskImage& image, Polarity polarity) {
  if (polarity == Polarity::Foreground) return label_components(image);
  const MaskImage inverted = !image;
  return label_components(inverted);
}

std::vector<Blob> extract_holes(const MaskImage& image) {
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());
  // Flood the border-connected background, 8-connected.
  MaskImage border_bg(h, w);
  border_bg.setConstant(false);
  std::vector<std::pair<int, int>> stack;
  auto push = [&](int x, int y) {
    if (x < 0 || x >= w || y < 0 || y >= h) return;
    if (image(y, x) || border_bg(y, x)) return;
    border_bg(y, x) = true;
    stack.emplace_back(x, y);
  };
  for (int x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx != 0 || dy != 0) push(x + dx, y + dy);
      }
  }
  const MaskImage background = !image;
  return label_components(background, &border_bg);
}

double equivalent_diameter_mm(const Blob& blob, const VoxelSpacing& spacing) {
  if (blob.area_px < 1) throw std::invalid_argument("equivalent_diameter_mm: empty blob");
  spacing.validate();
  const double area_mm2 = blob.area_px * spacing.in_plane_mm * spacing.in_plane_mm;
  return 2.0 * std::sqrt(area_mm2 / std::numbers::pi);
}

std::vector<Blob> reject_lower_third(std::vector<Blob> blobs, int image_height) {
  if (image_height < 3) throw std::invalid_argument("reject_lower_third: height must be >= 3");
  const double cutoff = 2.0 * image_height / 3.0;
  std::erase_if(blobs, [cutoff](const Blob& b) { return b.centroid.y() > cutoff; });
  return blobs;
}

}  // namespace mandcad
