#include "spi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spi/forward.hpp"

namespace spi {

double psnr(const GrayImage& a, const GrayImage& b, double peak, double cap_db) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch("psnr: " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                        "x" + std::to_string(b.cols()));
  if (!(peak > 0)) throw ConfigInvalid("psnr: peak must be positive");
  require_finite(a, "psnr");
  require_finite(b, "psnr");
  const double mse = (a - b).squaredNorm() / double(a.size());
  if (mse == 0.0) return cap_db;
  return std::min(cap_db, 10.0 * std::log10(peak * peak / mse));
}

namespace {

Eigen::VectorXd gaussian_kernel(Eigen::Index window, double sigma) {
  Eigen::VectorXd k(window);
  const double mid = double(window - 1) / 2.0;
  for (Eigen::Index i = 0; i < window; ++i) {
    const double d = (double(i) - mid) / sigma;
    k[i] = std::exp(-0.5 * d * d);
  }
  return k / k.sum();
}

// 'valid' windowed weighted mean: out(r,c) covers the window whose top-left
// corner is (r,c).
GrayImage windowed_mean(const GrayImage& img, const Eigen::VectorXd& k) {
  const Eigen::Index w = k.size();
  GrayImage rows_done(img.rows(), img.cols() - w + 1);
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c + w <= img.cols(); ++c)
      rows_done(r, c) = img.row(r).segment(c, w).dot(k);
  GrayImage out(img.rows() - w + 1, rows_done.cols());
  for (Eigen::Index c = 0; c < rows_done.cols(); ++c)
    for (Eigen::Index r = 0; r + w <= img.rows(); ++r)
      out(r, c) = rows_done.col(c).segment(r, w).dot(k);
  return out;
}

}  // namespace

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& params) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch("ssim: shapes differ");
  if (params.window < 2 || !(params.sigma > 0) || !(params.dynamic_range > 0))
    throw ConfigInvalid("ssim: window >= 2, sigma > 0, dynamic_range > 0 required");
  if (std::min(a.rows(), a.cols()) < params.window)
    throw TooSmall("ssim: min dimension " +
                   std::to_string(std::min(a.rows(), a.cols())) + " < window " +
                   std::to_string(params.window));
  require_finite(a, "ssim");
  require_finite(b, "ssim");

  const Eigen::VectorXd k = gaussian_kernel(params.window, params.sigma);
  const GrayImage mu_a = windowed_mean(a, k);
  const GrayImage mu_b = windowed_mean(b, k);
  const GrayImage aa = windowed_mean(a.cwiseProduct(a), k);
  const GrayImage bb = windowed_mean(b.cwiseProduct(b), k);
  const GrayImage ab = windowed_mean(a.cwiseProduct(b), k);

  const double c1 = params.k1 * params.dynamic_range * params.k1 * params.dynamic_range;
  const double c2 = params.k2 * params.dynamic_range * params.k2 * params.dynamic_range;

  double total = 0.0;
  for (Eigen::Index r = 0; r < mu_a.rows(); ++r) {
    for (Eigen::Index c = 0; c < mu_a.cols(); ++c) {
      const double ma = mu_a(r, c), mb = mu_b(r, c);
      const double va = aa(r, c) - ma * ma;
      const double vb = bb(r, c) - mb * mb;
      const double cov = ab(r, c) - ma * mb;
      total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return total / double(mu_a.size());
}

EffectiveBits effective_bits(const CyclicSMatrix& m, const GrayImage& img,
                             double quantum) {
  if (!(quantum > 0)) throw ConfigInvalid("effective_bits: quantum must be positive");
  // Bucket sums of pixels on the quantum grid are themselves exact multiples
  // of the quantum; the FFT's ~1e-13 relative error is far below half a step,
  // so snapping recovers the exact integer levels.
  const Eigen::VectorXd sums = ideal_bucket_sums(m, img);
  std::vector<long long> levels(static_cast<size_t>(sums.size()));
  for (Eigen::Index j = 0; j < sums.size(); ++j)
    levels[static_cast<size_t>(j)] = std::llround(sums[j] / quantum);
  std::sort(levels.begin(), levels.end());
  const auto unique_end = std::unique(levels.begin(), levels.end());

  EffectiveBits out;
  out.n_unique = std::distance(levels.begin(), unique_end);
  out.bits = std::log2(double(out.n_unique));
  return out;
}

}  // namespace spi
