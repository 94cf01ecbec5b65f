#pragma once

#include "spi/forward.hpp"
#include "spi/image.hpp"
#include "spi/mls.hpp"

namespace spi {

// Fills skipped entries from the measured ones. linear wraps around the end
// of the trace (the pattern index is cyclic); nearest takes the closer
// measured neighbor, earlier index on ties. Needs 2 (linear) or 1 (nearest)
// measured samples. The one-argument form uses the plan the trace carries.
VoltageTrace interpolate_trace(const VoltageTrace& trace, SamplingPlan::Interp interp);
VoltageTrace interpolate_trace(const VoltageTrace& trace);

// Smallest gap between measured indices; 1 for a complete trace. Lets tools
// report the stride of a trace loaded from disk.
Eigen::Index trace_stride(const VoltageTrace& trace);

// Inverts the measurement by dividing out the kernel spectrum:
//   X = reverse(IDFT(DFT(V) / (gain * DFT(c1))))
// then reshapes to the pattern grid. The trace must be complete.
GrayImage reconstruct(const CyclicSMatrix& m, const VoltageTrace& trace, double gain = 1.0);

// Extracts an active_w x active_h window (width first — display convention)
// anchored at the given top-left corner.
GrayImage crop_active(const GrayImage& img, Eigen::Index active_w, Eigen::Index active_h,
                      Eigen::Index row0 = 0, Eigen::Index col0 = 0);

}  // namespace spi
