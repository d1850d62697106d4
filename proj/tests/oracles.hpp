// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written as direct, unoptimized
// enumeration and must not call the code paths it verifies.
#pragma once

#include "mandcad/imaging.hpp"
#include "mandcad/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracles {

// Exhaustive maximum-entropy threshold: evaluates the class-conditional
// entropy sum for all 256 splits straight from the histogram.
inline int kapur_exhaustive(const std::array<std::int64_t, 256>& hist) {
  std::int64_t total = 0;
  for (auto c : hist) total += c;
  const double n = static_cast<double>(total);

  int best_t = -1;
  double best = -1e300;
  for (int t = 0; t < 256; ++t) {
    std::int64_t nb = 0;
    for (int i = 0; i <= t; ++i) nb += hist[i];
    if (nb == 0 || nb == total) continue;
    const double pb = static_cast<double>(nb) / n;
    const double pf = 1.0 - pb;
    double hb = 0.0, hf = 0.0;
    for (int i = 0; i <= t; ++i)
      if (hist[i] > 0) {
        const double q = (static_cast<double>(hist[i]) / n) / pb;
        hb -= q * std::log(q);
      }
    for (int i = t + 1; i < 256; ++i)
      if (hist[i] > 0) {
        const double q = (static_cast<double>(hist[i]) / n) / pf;
        hf -= q * std::log(q);
      }
    if (hb + hf > best) {
      best = hb + hf;
      best_t = t;
    }
  }
  return best_t;
}

inline std::array<std::int64_t, 256> histogram(const mandcad::SliceU8& img) {
  std::array<std::int64_t, 256> hist{};
  for (Eigen::Index i = 0; i < img.size(); ++i) ++hist[img.data()[i]];
  return hist;
}

// Whole-plane binary morphology by direct offset enumeration. The image is
// treated as false outside its bounds.
inline mandcad::MaskImage dilate_naive(const mandcad::MaskImage& a,
                                       const mandcad::StructuringElement& se) {
  const int h = static_cast<int>(a.rows()), w = static_cast<int>(a.cols());
  mandcad::MaskImage out(h, w);
  out.setConstant(false);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool hit = false;
      for (const auto& [dx, dy] : se.offsets) {
        const int sx = x - dx, sy = y - dy;
        if (sx >= 0 && sx < w && sy >= 0 && sy < h && a(sy, sx)) {
          hit = true;
          break;
        }
      }
      out(y, x) = hit;
    }
  return out;
}

inline mandcad::MaskImage erode_naive(const mandcad::MaskImage& a,
                                      const mandcad::StructuringElement& se) {
  const int h = static_cast<int>(a.rows()), w = static_cast<int>(a.cols());
  mandcad::MaskImage out(h, w);
  out.setConstant(false);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool all = true;
      for (const auto& [dx, dy] : se.offsets) {
        const int sx = x + dx, sy = y + dy;
        if (sx < 0 || sx >= w || sy < 0 || sy >= h || !a(sy, sx)) {
          all = false;
          break;
        }
      }
      out(y, x) = all;
    }
  return out;
}

inline mandcad::MaskImage close_naive(const mandcad::MaskImage& a,
                                      const mandcad::StructuringElement& se) {
  const int r = se.radius_px;
  const int h = static_cast<int>(a.rows()), w = static_cast<int>(a.cols());
  mandcad::MaskImage padded(h + 2 * r, w + 2 * r);
  padded.setConstant(false);
  padded.block(r, r, h, w) = a;
  const mandcad::MaskImage closed = erode_naive(dilate_naive(padded, se), se);
  return closed.block(r, r, h, w);
}

// Online (single-pass) central moments, Welford/Pebay update.
struct OnlineMoments {
  double n = 0, mean = 0, m2 = 0, m3 = 0, m4 = 0;

  void push(double x) {
    const double n1 = n;
    n += 1.0;
    const double delta = x - mean;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
    m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
    m2 += term1;
    mean += delta_n;
  }

  double variance() const { return m2 / n; }
  double skewness() const {
    const double v = variance();
    return v > 0 ? (m3 / n) / std::pow(v, 1.5) : 0.0;
  }
  double kurtosis() const {
    const double v = variance();
    return v > 0 ? (m4 / n) / (v * v) : 0.0;
  }
};

// Direct pair enumeration for the horizontal symmetric co-occurrence matrix.
inline Eigen::MatrixXd glcm_brute(const mandcad::SliceU8& roi, int levels) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(levels, levels);
  for (int y = 0; y < roi.rows(); ++y)
    for (int x = 0; x + 1 < roi.cols(); ++x) {
      const int a = roi(y, x) * levels / 256;
      const int b = roi(y, x + 1) * levels / 256;
      counts(a, b) += 1.0;
      counts(b, a) += 1.0;
    }
  return counts / counts.sum();
}

}  // namespace oracles
