#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace spi {

// Thin wrappers over Eigen's FFT so callers never touch plan objects.
// Transforms are unnormalized forward / 1/N inverse (Eigen's convention).

inline Eigen::VectorXcd fft(const Eigen::VectorXcd& x) {
  Eigen::FFT<double> plan;
  Eigen::VectorXcd out(x.size());
  plan.fwd(out, x);
  return out;
}

inline Eigen::VectorXcd fft(const Eigen::VectorXd& x) {
  return fft(Eigen::VectorXcd(x.cast<std::complex<double>>()));
}

inline Eigen::VectorXcd ifft(const Eigen::VectorXcd& x) {
  Eigen::FFT<double> plan;
  Eigen::VectorXcd out(x.size());
  plan.inv(out, x);
  return out;
}

// Index reversal mod N: out[k] = in[(N-k) mod N]. Self-inverse. Turns the
// cross-correlation the detector measures into a circular convolution.
template <typename Vec>
Vec circular_reverse(const Vec& x) {
  const Eigen::Index n = x.size();
  Vec out(n);
  out[0] = x[0];
  for (Eigen::Index k = 1; k < n; ++k) out[k] = x[n - k];
  return out;
}

}  // namespace spi
