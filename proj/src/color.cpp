#include "spi/color.hpp"

#include <cmath>

namespace spi {

namespace {

double trapezoid(const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    sum += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  return sum;
}

void check_spectrum(const Eigen::VectorXd& s, const CmfTable& cmf, const char* who) {
  if (s.size() != cmf.size())
    throw GridMismatch(std::string(who) + ": spectrum has " + std::to_string(s.size()) +
                       " samples, CMF grid has " + std::to_string(cmf.size()));
  if (s.minCoeff() < 0.0)
    throw GridMismatch(std::string(who) + ": spectrum has negative power");
}

}  // namespace

Eigen::VectorXd gaussian_spectrum(double center_nm, double fwhm_nm, const CmfTable& cmf) {
  if (!(fwhm_nm > 0)) throw ConfigInvalid("gaussian_spectrum: FWHM must be positive");
  const double sigma = fwhm_nm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  Eigen::VectorXd s(cmf.size());
  for (Eigen::Index i = 0; i < cmf.size(); ++i) {
    const double d = (cmf.wavelength_nm[i] - center_nm) / sigma;
    s[i] = std::exp(-0.5 * d * d);
  }
  const double integral = trapezoid(s, cmf.wavelength_nm);
  if (integral <= 0.0)
    throw ConfigInvalid("gaussian_spectrum: line at " + std::to_string(center_nm) +
                        " nm carries no power on the 380-780 nm grid");
  return s / integral;
}

Eigen::VectorXd monochromatic_spectrum(double center_nm, const CmfTable& cmf) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < cmf.size(); ++i)
    if (std::abs(cmf.wavelength_nm[i] - center_nm) <
        std::abs(cmf.wavelength_nm[best] - center_nm))
      best = i;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(cmf.size());
  s[best] = 1.0;
  return s / trapezoid(s, cmf.wavelength_nm);
}

SpectralChannel make_channel(double center_nm, GrayImage image, double fwhm_nm,
                             double gain) {
  SpectralChannel ch;
  ch.center_wavelength_nm = center_nm;
  ch.spectrum = gaussian_spectrum(center_nm, fwhm_nm);
  ch.image = std::move(image);
  ch.gain = gain;
  return ch;
}

Xyz channel_to_xyz(const SpectralChannel& ch, const CmfTable& cmf) {
  check_spectrum(ch.spectrum, cmf, "channel_to_xyz");
  Xyz out;
  out.x = trapezoid(ch.spectrum.cwiseProduct(cmf.xbar), cmf.wavelength_nm);
  out.y = trapezoid(ch.spectrum.cwiseProduct(cmf.ybar), cmf.wavelength_nm);
  out.z = trapezoid(ch.spectrum.cwiseProduct(cmf.zbar), cmf.wavelength_nm);
  return out;
}

const Eigen::Matrix3d& xyz_to_linear_srgb() {
  static const Eigen::Matrix3d m = [] {
    Eigen::Matrix3d m;
    m << 3.2404542, -1.5371385, -0.4985314,
        -0.9692660, 1.8760108, 0.0415560,
        0.0556434, -0.2040259, 1.0572252;
    return m;
  }();
  return m;
}

double gamma_encode(double v, double gamma) {
  if (!(gamma > 0)) throw BadGamma("gamma_encode: gamma must be positive");
  return std::pow(v, 1.0 / gamma);
}

double gamma_decode(double v, double gamma) {
  if (!(gamma > 0)) throw BadGamma("gamma_decode: gamma must be positive");
  return std::pow(v, gamma);
}

RgbImage fuse_rgb(const std::array<SpectralChannel, 3>& channels, const CmfTable& cmf,
                  double gamma) {
  if (!(gamma > 0)) throw BadGamma("fuse_rgb: gamma must be positive");
  const Eigen::Index rows = channels[0].image.rows(), cols = channels[0].image.cols();
  for (const auto& ch : channels) {
    if (ch.image.rows() != rows || ch.image.cols() != cols)
      throw ShapeMismatch("fuse_rgb: channel images are not co-registered");
    require_finite(ch.image, "fuse_rgb");
  }

  RgbImage out{GrayImage::Zero(rows, cols), GrayImage::Zero(rows, cols),
               GrayImage::Zero(rows, cols)};
  for (const auto& ch : channels) {
    const Xyz xyz = channel_to_xyz(ch, cmf);
    Eigen::Vector3d rgb =
        xyz_to_linear_srgb() * Eigen::Vector3d(xyz.x, xyz.y, xyz.z) * ch.gain;
    rgb = rgb.cwiseMax(0.0);  // out-of-gamut channels clip toward the axes
    out.r += ch.image * rgb[0];
    out.g += ch.image * rgb[1];
    out.b += ch.image * rgb[2];
  }

  const double peak =
      std::max({out.r.maxCoeff(), out.g.maxCoeff(), out.b.maxCoeff()});
  if (peak <= 0.0) return out;  // nothing visible: leave it black

  for (GrayImage* plane : {&out.r, &out.g, &out.b})
    *plane = (*plane / peak).unaryExpr([gamma](double v) {
      return gamma_encode(std::clamp(v, 0.0, 1.0), gamma);
    });
  return out;
}

}  // namespace spi
