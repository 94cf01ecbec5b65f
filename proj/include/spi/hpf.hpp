#pragma once

#include <complex>

#include "spi/forward.hpp"
#include "spi/image.hpp"

namespace spi {

// Analog-style high-pass applied to the voltage sequence before
// reconstruction. The continuous prototype is first-order,
//   H(f) = (j f/f_c) / (1 + j f/f_c),
// cascaded `order` times. dft_multiply applies H at the signed bin
// frequencies k/(T*N) exactly; time_domain runs a bilinear-transform IIR
// over the cyclic trace for fidelity experiments.
struct FilterSpec {
  double cutoff_hz = 0.0;
  int order = 1;
  enum class Realization { dft_multiply, time_domain } realization =
      Realization::dft_multiply;
};

std::complex<double> highpass_response(double f_hz, const FilterSpec& spec);

// Pixel-domain cutoff k_c = f_c * T * N; must land in [1, N/2).
double cutoff_bin(const FilterSpec& spec, double dwell_seconds, Eigen::Index n);
void validate(const FilterSpec& spec, double dwell_seconds, Eigen::Index n);

VoltageTrace hpf_trace(const VoltageTrace& trace, const FilterSpec& spec);

// The filter the measurement chain implies on the image itself: 1-D over the
// row-major vectorization in the same orientation the detector sees it — not
// a 2-D image filter. reconstruct(hpf_trace(measure_full(X))) equals this.
GrayImage spatial_hpf(const GrayImage& img, const FilterSpec& spec,
                      double dwell_seconds, Eigen::Index n);

// Otsu's histogram split over a 256-bin histogram of values in [0,1]
// (values outside are clamped into range). Returns the upper edge of the
// chosen bin. Throws DegenerateHistogram when all values share one bin.
double otsu_threshold(const Eigen::VectorXd& values);

// |grad| normalized by its max, binarized at fraction * Otsu. Sign carries no
// extra information (|−g| = |g|), so the positive and negative polarities
// collapse into the single magnitude pass. Constant input gives an empty map.
BinaryImage threshold_edges(const GrayImage& grad, double otsu_fraction = 0.7);

}  // namespace spi
