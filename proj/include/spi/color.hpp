#pragma once

#include <array>

#include "spi/image.hpp"

namespace spi {

// CIE 1931 2-degree standard observer, 380-780 nm at 5 nm steps.
struct CmfTable {
  Eigen::VectorXd wavelength_nm;
  Eigen::VectorXd xbar, ybar, zbar;

  Eigen::Index size() const { return wavelength_nm.size(); }
};

// The embedded table (81 rows). Values are the standard published ones; see
// cmf_data.cpp for provenance.
const CmfTable& cie_1931_cmf();

// One narrowband source plus the grayscale intensities measured through it.
struct SpectralChannel {
  double center_wavelength_nm = 0.0;
  Eigen::VectorXd spectrum;  // power density on the CMF grid, unit integral
  GrayImage image;
  double gain = 1.0;  // display weight; the near-IR channel needs one to show up
};

// Gaussian line shape on the CMF grid, trapezoid-normalized to unit integral
// (tails clipped by the grid are simply lost before normalizing).
Eigen::VectorXd gaussian_spectrum(double center_nm, double fwhm_nm,
                                  const CmfTable& cmf = cie_1931_cmf());

// Delta line: all mass in the grid point nearest center_nm, unit integral.
Eigen::VectorXd monochromatic_spectrum(double center_nm,
                                       const CmfTable& cmf = cie_1931_cmf());

SpectralChannel make_channel(double center_nm, GrayImage image, double fwhm_nm = 25.0,
                             double gain = 1.0);

struct Xyz {
  double x = 0.0, y = 0.0, z = 0.0;
};

// Trapezoidal integration of spectrum * CMF over the shared grid.
Xyz channel_to_xyz(const SpectralChannel& ch, const CmfTable& cmf = cie_1931_cmf());

// Fixed XYZ -> linear sRGB (D65) matrix.
const Eigen::Matrix3d& xyz_to_linear_srgb();

double gamma_encode(double v, double gamma);
double gamma_decode(double v, double gamma);

// Per pixel: sum of channel intensity * (per-channel linear RGB color), the
// color being the channel's tristimulus through the sRGB matrix with negative
// (out-of-gamut) components clipped. The result is normalized by its global
// max and gamma-encoded.
RgbImage fuse_rgb(const std::array<SpectralChannel, 3>& channels,
                  const CmfTable& cmf = cie_1931_cmf(), double gamma = 2.2);

}  // namespace spi
