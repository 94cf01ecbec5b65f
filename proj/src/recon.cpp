#include "spi/recon.hpp"

#include <vector>

#include "spi/fft.hpp"

namespace spi {

VoltageTrace interpolate_trace(const VoltageTrace& trace, SamplingPlan::Interp interp) {
  const Eigen::Index n = trace.length();
  if (trace.missing.size() != n)
    throw LengthMismatch("interpolate_trace: missing flags " +
                         std::to_string(trace.missing.size()) + " vs samples " +
                         std::to_string(n));
  const Eigen::Index need = interp == SamplingPlan::Interp::linear ? 2 : 1;
  if (trace.measured_count() < need)
    throw TooFewSamples("interpolate_trace: " + std::to_string(trace.measured_count()) +
                        " measured samples");
  if (trace.complete()) return trace;

  std::vector<Eigen::Index> measured;
  measured.reserve(trace.measured_count());
  for (Eigen::Index j = 0; j < n; ++j)
    if (!trace.missing[j]) measured.push_back(j);

  VoltageTrace out = trace;
  // Walk each cyclic gap between consecutive measured indices.
  const auto m = static_cast<Eigen::Index>(measured.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index a = measured[i];
    const Eigen::Index b = measured[(i + 1) % m];
    const Eigen::Index gap = (b - a + n) % n;  // 0 only if m == 1
    const Eigen::Index span = gap == 0 ? n : gap;
    const double va = trace.samples[a], vb = trace.samples[b];
    for (Eigen::Index t = 1; t < span; ++t) {
      const Eigen::Index j = (a + t) % n;
      if (!out.missing[j]) continue;
      if (interp == SamplingPlan::Interp::linear)
        out.samples[j] = va + (vb - va) * double(t) / double(span);
      else
        out.samples[j] = 2 * t <= span ? va : vb;
      out.missing[j] = 0;
    }
  }
  return out;
}

VoltageTrace interpolate_trace(const VoltageTrace& trace) {
  return interpolate_trace(trace, trace.plan.interp);
}

Eigen::Index trace_stride(const VoltageTrace& trace) {
  if (trace.complete()) return 1;
  Eigen::Index prev = -1, best = trace.length();
  for (Eigen::Index j = 0; j < trace.length(); ++j) {
    if (trace.missing[j]) continue;
    if (prev >= 0) best = std::min(best, j - prev);
    prev = j;
  }
  return prev < 0 ? trace.length() : best;
}

GrayImage reconstruct(const CyclicSMatrix& m, const VoltageTrace& trace, double gain) {
  const Eigen::Index n = m.n();
  if (trace.length() != n)
    throw LengthMismatch("reconstruct: trace length " + std::to_string(trace.length()) +
                         " vs matrix order " + std::to_string(n));
  if (!trace.complete())
    throw IncompleteTrace("reconstruct: " +
                          std::to_string(n - trace.measured_count()) +
                          " samples missing; interpolate first");
  if (!(gain > 0)) throw ConfigInvalid("reconstruct: gain must be positive");
  if (!trace.samples.allFinite())
    throw NonFiniteInput("reconstruct: trace contains NaN or Inf");

  const Eigen::VectorXcd& kernel = m.kernel_dft();
  // An intact maximal-length kernel is bounded away from zero everywhere;
  // a tampered matrix file might not be.
  if (kernel.cwiseAbs().minCoeff() < 1e-9)
    throw KernelZero("reconstruct: kernel spectrum has a near-zero bin");

  const Eigen::VectorXcd y =
      ifft(fft(trace.samples).cwiseQuotient(kernel * gain));
  const Eigen::VectorXd x = circular_reverse(Eigen::VectorXd(y.real()));
  return from_vector(x, m.pattern_rows(), m.pattern_cols());
}

GrayImage crop_active(const GrayImage& img, Eigen::Index active_w, Eigen::Index active_h,
                      Eigen::Index row0, Eigen::Index col0) {
  if (active_w < 1 || active_h < 1 || row0 < 0 || col0 < 0 ||
      row0 + active_h > img.rows() || col0 + active_w > img.cols())
    throw BadCrop("crop_active: " + std::to_string(active_w) + "x" +
                  std::to_string(active_h) + " at (" + std::to_string(row0) + "," +
                  std::to_string(col0) + ") from " + std::to_string(img.cols()) + "x" +
                  std::to_string(img.rows()) + " (WxH)");
  return img.block(row0, col0, active_h, active_w);
}

}  // namespace spi
