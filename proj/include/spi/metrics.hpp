#pragma once

#include "spi/image.hpp"
#include "spi/mls.hpp"

namespace spi {

inline constexpr double kPsnrCapDb = 99.0;

// 10*log10(peak^2 / MSE), capped instead of infinite for identical inputs.
double psnr(const GrayImage& a, const GrayImage& b, double peak = 1.0,
            double cap_db = kPsnrCapDb);

// Reference parameters from the original SSIM formulation; window is square
// Gaussian, and the map is averaged over valid (fully-covered) positions.
struct SsimParams {
  Eigen::Index window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& params = {});

// How many distinct ideal (noiseless, unquantized) bucket sums the matrix
// produces on this image — the ADC precision the scene actually demands.
// Sums are snapped to `quantum` to make uniqueness exact; the default matches
// images whose pixels live on the 8-bit grid k/255.
struct EffectiveBits {
  Eigen::Index n_unique = 0;
  double bits = 0.0;
};

EffectiveBits effective_bits(const CyclicSMatrix& m, const GrayImage& img,
                             double quantum = 1.0 / 255.0);

struct QualityReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  Eigen::Index n_unique_levels = 0;
  double effective_bits = 0.0;
};

}  // namespace spi
