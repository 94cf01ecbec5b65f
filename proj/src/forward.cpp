#include "spi/forward.hpp"

#include <cmath>

#include "spi/fft.hpp"
#include "spi/rng.hpp"

namespace spi {

void validate(const MeasurementModel& model) {
  if (!(model.gain > 0) || !std::isfinite(model.gain))
    throw ConfigInvalid("measurement: gain must be positive, got " +
                        std::to_string(model.gain));
  if (model.noise_sigma < 0 || !std::isfinite(model.noise_sigma))
    throw ConfigInvalid("measurement: noise_sigma must be >= 0");
  if (model.adc_bits < 0 || model.adc_bits > 24)
    throw ConfigInvalid("measurement: adc_bits " + std::to_string(model.adc_bits) +
                        " outside 0..24");
  if (!(model.dwell_seconds > 0))
    throw ConfigInvalid("measurement: dwell_seconds must be positive");
}

void validate(const SamplingPlan& plan, Eigen::Index n) {
  if (plan.stride < 1 || plan.stride > n)
    throw ConfigInvalid("sampling plan: stride " + std::to_string(plan.stride) +
                        " outside 1.." + std::to_string(n));
}

Eigen::Index planned_count(const SamplingPlan& plan, Eigen::Index n) {
  validate(plan, n);
  return (n + plan.stride - 1) / plan.stride;
}

Eigen::VectorXd ideal_bucket_sums(const CyclicSMatrix& m, const GrayImage& img) {
  if (img.rows() != m.pattern_rows() || img.cols() != m.pattern_cols())
    throw ShapeMismatch("measure: image " + std::to_string(img.rows()) + "x" +
                        std::to_string(img.cols()) + " vs patterns " +
                        std::to_string(m.pattern_rows()) + "x" +
                        std::to_string(m.pattern_cols()));
  require_finite(img, "measure");

  // sum_i bits[(i+j) % N] * x[i] is a circular convolution of the first row
  // with the index-reversed image vector.
  const Eigen::VectorXd x = vectorize(img);
  const Eigen::VectorXcd prod =
      m.kernel_dft().cwiseProduct(fft(Eigen::VectorXd(circular_reverse(x))));
  return ifft(prod).real();
}

VoltageTrace measure_planned(const CyclicSMatrix& m, const GrayImage& img,
                             const MeasurementModel& model, const SamplingPlan& plan) {
  validate(model);
  validate(plan, m.n());
  const Eigen::Index n = m.n();

  Eigen::VectorXd ideal = ideal_bucket_sums(m, img) * model.gain;

  VoltageTrace trace;
  trace.samples = Eigen::VectorXd::Zero(n);
  trace.missing.setOnes(n);
  trace.plan = plan;
  trace.dwell_seconds = model.dwell_seconds;
  trace.adc_bits = model.adc_bits;
  trace.rng_seed = model.rng_seed;

  auto rng = make_rng(model.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double full_scale = model.adc_full_scale;
  if (full_scale <= 0) full_scale = 1.05 * ideal.maxCoeff();

  // one LSB spans full_scale / 2^bits; codes are clipped to [0, full_scale]
  const double lsb =
      model.adc_bits > 0 ? full_scale / double(1 << model.adc_bits) : 0.0;
  for (Eigen::Index j = 0; j < n; j += plan.stride) {
    double v = ideal[j];
    if (model.noise_sigma > 0) v += model.noise_sigma * gauss(rng);
    if (model.adc_bits > 0 && lsb > 0) {
      v = std::clamp(std::round(v / lsb) * lsb, 0.0, full_scale);
    }
    trace.samples[j] = v;
    trace.missing[j] = 0;
  }
  return trace;
}

VoltageTrace measure_full(const CyclicSMatrix& m, const GrayImage& img,
                          const MeasurementModel& model) {
  return measure_planned(m, img, model, SamplingPlan{});
}

AcquisitionTime acquisition_time(const SamplingPlan& plan, Eigen::Index n_patterns,
                                 double frame_rate_hz, double overhead_factor) {
  if (!(frame_rate_hz > 0))
    throw ConfigInvalid("acquisition_time: frame rate must be positive");
  if (overhead_factor < 1.0)
    throw ConfigInvalid("acquisition_time: overhead factor must be >= 1");
  AcquisitionTime t;
  t.pattern_seconds = double(planned_count(plan, n_patterns)) / frame_rate_hz;
  t.total_seconds = t.pattern_seconds * overhead_factor;
  return t;
}

}  // namespace spi
