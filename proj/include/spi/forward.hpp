#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "spi/image.hpp"
#include "spi/mls.hpp"

namespace spi {

// Photodiode + ADC chain applied to each pattern's bucket sum.
struct MeasurementModel {
  double gain = 1.0;            // volts per unit bucket sum
  double noise_sigma = 0.0;     // additive white Gaussian noise, volts
  int adc_bits = 14;            // 0 = skip quantization
  double adc_full_scale = 0.0;  // <= 0 picks 1.05 x the largest ideal voltage
  double dwell_seconds = 1.0 / 22727.0;
  std::uint64_t rng_seed = 0x5eed;
};

// Which pattern indices actually get displayed, and how gaps are filled later.
struct SamplingPlan {
  enum class Interp { linear, nearest };
  Eigen::Index stride = 1;  // measure every stride-th pattern, starting at the first
  Interp interp = Interp::linear;
};

struct VoltageTrace {
  Eigen::VectorXd samples;  // length N; skipped entries are 0
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> missing;  // 1 = not measured
  SamplingPlan plan;        // how the trace was (to be) filled in
  double dwell_seconds = 0.0;
  int adc_bits = 0;
  std::uint64_t rng_seed = 0;

  Eigen::Index length() const { return samples.size(); }
  Eigen::Index measured_count() const {
    return samples.size() - static_cast<Eigen::Index>(missing.cast<int>().sum());
  }
  bool complete() const { return missing.size() == 0 || missing.maxCoeff() == 0; }
};

void validate(const MeasurementModel& model);
void validate(const SamplingPlan& plan, Eigen::Index n);

Eigen::Index planned_count(const SamplingPlan& plan, Eigen::Index n);

// Ideal bucket sums for all N patterns at once: entry j-1 is row(j) dot the
// flattened image, computed as one circular correlation in the frequency
// domain rather than N dot products.
Eigen::VectorXd ideal_bucket_sums(const CyclicSMatrix& m, const GrayImage& img);

// Full chain: bucket sums -> gain -> noise on measured entries -> ADC.
VoltageTrace measure_planned(const CyclicSMatrix& m, const GrayImage& img,
                             const MeasurementModel& model, const SamplingPlan& plan);
VoltageTrace measure_full(const CyclicSMatrix& m, const GrayImage& img,
                          const MeasurementModel& model);

struct AcquisitionTime {
  double pattern_seconds = 0.0;  // displayed patterns / frame rate
  double total_seconds = 0.0;    // with per-frame overhead factored in
};

AcquisitionTime acquisition_time(const SamplingPlan& plan, Eigen::Index n_patterns,
                                 double frame_rate_hz, double overhead_factor = 1.0);

// Collapses a physical noise chain (input-referred current density, detection
// bandwidth, transimpedance gain) into the single voltage sigma the model uses.
inline double noise_sigma_from_physical(double current_density_a_per_rthz,
                                        double bandwidth_hz,
                                        double transimpedance_v_per_a) {
  return current_density_a_per_rthz * std::sqrt(bandwidth_hz) * transimpedance_v_per_a;
}

}  // namespace spi
