#include "mandcad/features.hpp"

#include <cmath>

namespace mandcad {

Roi make_roi(const SliceU8& slice, const Blob& blob, int margin_px) {
  if (blob.area_px < 1) throw std::invalid_argument("make_roi: empty blob");
  const int w = static_cast<int>(slice.cols());
  const int h = static_cast<int>(slice.rows());
  Roi roi;
  roi.x0 = std::max(0, blob.bbox.x_min - margin_px);
  roi.y0 = std::max(0, blob.bbox.y_min - margin_px);
  const int x1 = std::min(w - 1, blob.bbox.x_max + margin_px);
  const int y1 = std::min(h - 1, blob.bbox.y_max + margin_px);
  roi.pixels = slice.block(roi.y0, roi.x0, y1 - roi.y0 + 1, x1 - roi.x0 + 1);
  roi.source_blob = blob;
  return roi;
}

FirstOrderStats first_order_stats(const Roi& roi) {
  const std::size_t n = static_cast<std::size_t>(roi.pixels.size());
  if (n == 0) throw std::invalid_argument("first_order_stats: empty ROI");
  const std::uint8_t* px = roi.pixels.data();

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += px[i];
  const double mean = sum / static_cast<double>(n);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = px[i] - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);

  FirstOrderStats stats;
  stats.mean = mean;
  stats.stddev = std::sqrt(m2);
  if (m2 > 0.0) {
    stats.skewness = m3 / (stats.stddev * stats.stddev * stats.stddev);
    stats.kurtosis = m4 / (m2 * m2);
  }
  return stats;
}

Eigen::MatrixXd glcm(const Roi& roi, int levels) {
  if (levels < 2) throw std::invalid_argument("glcm: levels must be >= 2");
  const int w = static_cast<int>(roi.pixels.cols());
  const int h = static_cast<int>(roi.pixels.rows());
  if (w < 2) throw DegenerateInputError("glcm: ROI narrower than 2 pixels");

  auto quantize = [levels](std::uint8_t v) { return (static_cast<int>(v) * levels) >> 8; };

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(levels, levels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      const int a = quantize(roi.pixels(y, x));
      const int b = quantize(roi.pixels(y, x + 1));
      counts(a, b) += 1.0;
      counts(b, a) += 1.0;
    }
  return counts / counts.sum();
}

HaralickFeatures haralick_features(const Eigen::MatrixXd& glcm_matrix) {
  if (glcm_matrix.rows() != glcm_matrix.cols())
    throw std::invalid_argument("haralick_features: matrix must be square");
  if (glcm_matrix.minCoeff() < 0.0 || std::abs(glcm_matrix.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("haralick_features: matrix is not a normalized co-occurrence");

  HaralickFeatures feats;
  const int n = static_cast<int>(glcm_matrix.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p = glcm_matrix(i, j);
      const int d = i - j;
      feats.contrast += static_cast<double>(d) * d * p;
      feats.homogeneity += p / (1.0 + std::abs(d));
      feats.energy += p * p;
      if (p > 0.0) feats.entropy -= p * std::log(p);
    }
  return feats;
}

Eigen::Matrix<double, 7, 1> hu_moments(const Roi& roi) {
  const int w = static_cast<int>(roi.pixels.cols());
  const int h = static_cast<int>(roi.pixels.rows());

  double m00 = 0.0, m10 = 0.0, m01 = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = roi.pixels(y, x);
      m00 += v;
      m10 += v * x;
      m01 += v * y;
    }
  if (m00 <= 0.0) throw DegenerateInputError("hu_moments: zero-mass ROI");
  const double cx = m10 / m00;
  const double cy = m01 / m00;

  double mu20 = 0, mu02 = 0, mu11 = 0, mu30 = 0, mu03 = 0, mu21 = 0, mu12 = 0;
  for (int y = 0; y < h; ++y) {
    const double dy = y - cy;
    for (int x = 0; x < w; ++x) {
      const double v = roi.pixels(y, x);
      if (v == 0.0) continue;
      const double dx = x - cx;
      const double dx2 = dx * dx;
      const double dy2 = dy * dy;
      mu20 += v * dx2;
      mu02 += v * dy2;
      mu11 += v * dx * dy;
      mu30 += v * dx2 * dx;
      mu03 += v * dy2 * dy;
      mu21 += v * dx2 * dy;
      mu12 += v * dx * dy2;
    }
  }

  const double s2 = m00 * m00;           // normalization for order 2
  const double s3 = s2 * std::sqrt(m00);  // normalization for order 3
  const double n20 = mu20 / s2;
  const double n02 = mu02 / s2;
  const double n11 = mu11 / s2;
  const double n30 = mu30 / s3;
  const double n03 = mu03 / s3;
  const double n21 = mu21 / s3;
  const double n12 = mu12 / s3;

  Eigen::Matrix<double, 7, 1> phi;
  const double a = n30 + n12;  // recurring sums
  const double b = n21 + n03;
  phi[0] = n20 + n02;
  phi[1] = (n20 - n02) * (n20 - n02) + 4.0 * n11 * n11;
  phi[2] = (n30 - 3.0 * n12) * (n30 - 3.0 * n12) + (3.0 * n21 - n03) * (3.0 * n21 - n03);
  phi[3] = a * a + b * b;
  phi[4] = (n30 - 3.0 * n12) * a * (a * a - 3.0 * b * b) +
           (3.0 * n21 - n03) * b * (3.0 * a * a - b * b);
  phi[5] = (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b;
  phi[6] = (3.0 * n21 - n03) * a * (a * a - 3.0 * b * b) -
           (n30 - 3.0 * n12) * b * (3.0 * a * a - b * b);
  return phi;
}

FeatureVector extract_feature_vector(const Roi& roi, int glcm_levels) {
  const FirstOrderStats fo = first_order_stats(roi);
  const HaralickFeatures ha = haralick_features(glcm(roi, glcm_levels));
  const auto hu = hu_moments(roi);

  FeatureVector v;
  v << fo.mean, fo.stddev, fo.skewness, fo.kurtosis, ha.contrast, ha.homogeneity, ha.energy,
      ha.entropy, hu[0], hu[1], hu[2], hu[3], hu[4], hu[5], hu[6];
  return v;
}

}  // namespace mandcad
