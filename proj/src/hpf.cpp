#include "spi/hpf.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "spi/fft.hpp"

namespace spi {

std::complex<double> highpass_response(double f_hz, const FilterSpec& spec) {
  const std::complex<double> jx(0.0, f_hz / spec.cutoff_hz);
  const std::complex<double> one_pole = jx / (1.0 + jx);
  std::complex<double> h(1.0, 0.0);
  for (int i = 0; i < spec.order; ++i) h *= one_pole;
  return h;
}

double cutoff_bin(const FilterSpec& spec, double dwell_seconds, Eigen::Index n) {
  return spec.cutoff_hz * dwell_seconds * double(n);
}

void validate(const FilterSpec& spec, double dwell_seconds, Eigen::Index n) {
  if (!(spec.cutoff_hz > 0))
    throw CutoffOutOfRange("filter: cutoff_hz must be positive");
  if (spec.order < 1)
    throw ConfigInvalid("filter: order must be >= 1");
  if (!(dwell_seconds > 0))
    throw ConfigInvalid("filter: dwell time must be positive");
  const double kc = cutoff_bin(spec, dwell_seconds, n);
  if (kc < 1.0 || kc >= double(n) / 2.0)
    throw CutoffOutOfRange("filter: k_c = " + std::to_string(kc) + " outside [1, " +
                           std::to_string(double(n) / 2.0) + ")");
}

namespace {

// Multiplies the spectrum by H at the signed bin frequencies. N is odd, so
// bins k <= (N-1)/2 are non-negative frequencies and the rest alias negative;
// H(-f) = conj(H(f)) keeps the result real.
Eigen::VectorXd apply_response_cyclic(const Eigen::VectorXd& v, double dwell,
                                      const FilterSpec& spec) {
  const Eigen::Index n = v.size();
  Eigen::VectorXcd spectrum = fft(v);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double signed_k = k <= (n - 1) / 2 ? double(k) : double(k) - double(n);
    spectrum[k] *= highpass_response(signed_k / (dwell * double(n)), spec);
  }
  return ifft(spectrum).real();
}

// Bilinear transform of the one-pole prototype, prewarped so the digital
// response matches the analog one exactly at f_c. Runs warm-up laps around
// the cyclic trace so the recorded lap is at periodic steady state (the
// start-up transient decays by ~e^(-2*pi*k_c) per lap).
Eigen::VectorXd apply_response_time_domain(const Eigen::VectorXd& v, double dwell,
                                           const FilterSpec& spec) {
  const Eigen::Index n = v.size();
  const double wc = 2.0 * std::numbers::pi * spec.cutoff_hz;
  const double warp = wc / std::tan(wc * dwell / 2.0);
  const double b0 = warp / (warp + wc);
  const double a1 = (warp - wc) / (warp + wc);

  Eigen::VectorXd x = v;
  Eigen::VectorXd y(n);
  constexpr int kLaps = 3;  // 2 warm-ups + 1 recorded
  for (int stage = 0; stage < spec.order; ++stage) {
    double x_prev = 0.0, y_prev = 0.0;
    for (Eigen::Index t = 0; t < kLaps * n; ++t) {
      const double xt = x[t % n];
      const double yt = a1 * y_prev + b0 * (xt - x_prev);
      x_prev = xt;
      y_prev = yt;
      if (t >= (kLaps - 1) * n) y[t % n] = yt;
    }
    x = y;
  }
  return x;
}

Eigen::VectorXd apply_filter(const Eigen::VectorXd& v, double dwell,
                             const FilterSpec& spec) {
  return spec.realization == FilterSpec::Realization::dft_multiply
             ? apply_response_cyclic(v, dwell, spec)
             : apply_response_time_domain(v, dwell, spec);
}

}  // namespace

VoltageTrace hpf_trace(const VoltageTrace& trace, const FilterSpec& spec) {
  if (!trace.complete())
    throw IncompleteTrace("hpf_trace: trace has missing samples; interpolate first");
  validate(spec, trace.dwell_seconds, trace.length());
  VoltageTrace out = trace;
  out.samples = apply_filter(trace.samples, trace.dwell_seconds, spec);
  return out;
}

GrayImage spatial_hpf(const GrayImage& img, const FilterSpec& spec,
                      double dwell_seconds, Eigen::Index n) {
  if (img.size() != n)
    throw ShapeMismatch("spatial_hpf: image has " + std::to_string(img.size()) +
                        " pixels, expected " + std::to_string(n));
  validate(spec, dwell_seconds, n);
  require_finite(img, "spatial_hpf");
  // The trace sees the image index-reversed (measurement is a correlation,
  // not a convolution), so the equivalent image filter acts in that
  // orientation. Same reversal pair reconstruct() uses.
  const Eigen::VectorXd rev = circular_reverse(Eigen::VectorXd(vectorize(img)));
  const Eigen::VectorXd filtered =
      circular_reverse(Eigen::VectorXd(apply_response_cyclic(rev, dwell_seconds, spec)));
  return from_vector(filtered, img.rows(), img.cols());
}

double otsu_threshold(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw DegenerateHistogram("otsu: no samples");

  std::array<double, 256> hist{};
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values[i], 0.0, 1.0);
    hist[std::min<int>(255, int(v * 256.0))] += 1.0;
  }

  const double total = double(values.size());
  double total_mean = 0.0;
  for (int b = 0; b < 256; ++b) total_mean += b * hist[b];
  total_mean /= total;

  // Exhaustive scan of all split points for the max between-class variance;
  // first (lowest) argmax wins.
  int best_bin = -1;
  double best_var = -1.0;
  double w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (total_mean * total - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best_var) {
      best_var = between;
      best_bin = t;
    }
  }
  if (best_bin < 0)
    throw DegenerateHistogram("otsu: all samples in one bin, no split exists");
  return double(best_bin + 1) / 256.0;
}

BinaryImage threshold_edges(const GrayImage& grad, double otsu_fraction) {
  if (!(otsu_fraction > 0) || otsu_fraction > 1)
    throw ConfigInvalid("threshold_edges: fraction " + std::to_string(otsu_fraction) +
                        " outside (0, 1]");
  require_finite(grad, "threshold_edges");

  const GrayImage mag = grad.cwiseAbs();
  const double peak = mag.maxCoeff();
  BinaryImage edges = BinaryImage::Zero(grad.rows(), grad.cols());
  if (peak <= 0.0) return edges;  // flat field: nothing to find

  const GrayImage norm = mag / peak;
  double tau;
  try {
    tau = otsu_threshold(vectorize(norm));
  } catch (const DegenerateHistogram&) {
    return edges;  // single-level magnitude: no split, no edges
  }
  const double cut = otsu_fraction * tau;
  for (Eigen::Index r = 0; r < norm.rows(); ++r)
    for (Eigen::Index c = 0; c < norm.cols(); ++c)
      edges(r, c) = norm(r, c) > cut ? 1 : 0;
  return edges;
}

}  // namespace spi
