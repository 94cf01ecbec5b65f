#include "spi/optics.hpp"

#include <algorithm>
#include <cmath>

#include "spi/fft.hpp"

namespace spi {

void validate(const ApertureModel& model) {
  if (!(model.detector_side_um > 0) || !(model.wavelength_um > 0) ||
      !(model.focal_mm > 0) || !(model.object_extent_mm > 0))
    throw ConfigInvalid("aperture: detector, wavelength, focal length and extent "
                        "must all be positive");
  if (model.na_diameter_um < 0)
    throw ConfigInvalid("aperture: NA diameter must be >= 0");
}

FourierScale fourier_scale(const ApertureModel& model, Eigen::Index rows,
                           Eigen::Index cols) {
  validate(model);
  const double pitch_mm = model.object_extent_mm / double(cols);
  const double lf_um_mm = model.wavelength_um * model.focal_mm;  // lambda*f
  FourierScale s;
  // One DFT bin is 1/extent in frequency; x = lambda*f*nu converts to microns.
  s.step_x_um = lf_um_mm / model.object_extent_mm;
  s.step_y_um = lf_um_mm / (pitch_mm * double(rows));
  s.extent_um = lf_um_mm / pitch_mm;
  return s;
}

namespace {

using CMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

CMatrix fft2(const GrayImage& img) {
  Eigen::FFT<double> plan;
  CMatrix out(img.rows(), img.cols());
  Eigen::VectorXcd tmp(img.cols());
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    Eigen::VectorXcd row = img.row(r).transpose().cast<std::complex<double>>();
    plan.fwd(tmp, row);
    out.row(r) = tmp.transpose();
  }
  Eigen::VectorXcd col(img.rows()), tmpc(img.rows());
  for (Eigen::Index c = 0; c < img.cols(); ++c) {
    col = out.col(c);
    plan.fwd(tmpc, col);
    out.col(c) = tmpc;
  }
  return out;
}

GrayImage ifft2_real(const CMatrix& f) {
  Eigen::FFT<double> plan;
  CMatrix work(f.rows(), f.cols());
  Eigen::VectorXcd col(f.rows()), tmpc(f.rows());
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    col = f.col(c);
    plan.inv(tmpc, col);
    work.col(c) = tmpc;
  }
  Eigen::VectorXcd tmp(f.cols());
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    Eigen::VectorXcd row = work.row(r).transpose();
    plan.inv(tmp, row);
    work.row(r) = tmp.transpose();
  }
  return work.real();
}

// DC lands at (rows/2, cols/2) after the shift.
CMatrix fftshift(const CMatrix& f) {
  const Eigen::Index rs = f.rows() / 2, cs = f.cols() / 2;
  CMatrix out(f.rows(), f.cols());
  for (Eigen::Index r = 0; r < f.rows(); ++r)
    for (Eigen::Index c = 0; c < f.cols(); ++c)
      out((r + rs) % f.rows(), (c + cs) % f.cols()) = f(r, c);
  return out;
}

CMatrix ifftshift(const CMatrix& f) {
  const Eigen::Index rs = f.rows() - f.rows() / 2, cs = f.cols() - f.cols() / 2;
  CMatrix out(f.rows(), f.cols());
  for (Eigen::Index r = 0; r < f.rows(); ++r)
    for (Eigen::Index c = 0; c < f.cols(); ++c)
      out((r + rs) % f.rows(), (c + cs) % f.cols()) = f(r, c);
  return out;
}

}  // namespace

FourierPlaneMap fourier_plane_intensity(const GrayImage& img, const ApertureModel& model) {
  require_finite(img, "fourier_plane_intensity");
  FourierPlaneMap map;
  map.scale = fourier_scale(model, img.rows(), img.cols());
  const CMatrix spectrum = fftshift(fft2(img));
  const double lf_um = model.wavelength_um * model.focal_mm * 1000.0;
  map.intensity = spectrum.cwiseAbs2() / (lf_um * lf_um);
  return map;
}

GrayImage aperture_filter(const GrayImage& img, const ApertureModel& model) {
  require_finite(img, "aperture_filter");
  const FourierScale scale = fourier_scale(model, img.rows(), img.cols());

  CMatrix spectrum = fftshift(fft2(img));
  const Eigen::Index rc = img.rows() / 2, cc = img.cols() / 2;
  const double half = model.detector_side_um / 2.0;
  const double na_r2 = model.na_diameter_um > 0
                           ? model.na_diameter_um * model.na_diameter_um / 4.0
                           : 0.0;
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    const double y = double(r - rc) * scale.step_y_um;
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      const double x = double(c - cc) * scale.step_x_um;
      bool pass = model.circular ? x * x + y * y <= half * half
                                 : std::abs(x) <= half && std::abs(y) <= half;
      if (pass && na_r2 > 0) pass = x * x + y * y <= na_r2;
      if (!pass) spectrum(r, c) = 0.0;
    }
  }
  GrayImage out = ifft2_real(ifftshift(spectrum));
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

double cutoff_lp_per_mm(const ApertureModel& model) {
  validate(model);
  // x = lambda*f*nu  =>  nu = x/(lambda*f); at the aperture edge x = side/2.
  const double lf_um2 = model.wavelength_um * model.focal_mm * 1000.0;
  return model.detector_side_um / 2.0 / lf_um2 * 1000.0;
}

double michelson_contrast(const GrayImage& img, const BarBlock& block) {
  // Average along the bars over the central 60% of the span, then compare the
  // three bar lines with the two gap lines.
  const double lo = block.span_lo + 0.2 * (block.span_hi - block.span_lo);
  const double hi = block.span_hi - 0.2 * (block.span_hi - block.span_lo);
  const auto clamp_row = [&](Eigen::Index v) {
    return std::clamp<Eigen::Index>(v, 0, img.rows() - 1);
  };
  const auto clamp_col = [&](Eigen::Index v) {
    return std::clamp<Eigen::Index>(v, 0, img.cols() - 1);
  };

  const auto line_mean = [&](double center) {
    const auto c = Eigen::Index(std::floor(center));
    double sum = 0.0;
    Eigen::Index count = 0;
    for (auto s = Eigen::Index(std::floor(lo)); s <= Eigen::Index(std::floor(hi)); ++s) {
      if (block.axis == 0)
        sum += img(clamp_row(s), clamp_col(c));
      else
        sum += img(clamp_row(c), clamp_col(s));
      ++count;
    }
    return count > 0 ? sum / double(count) : 0.0;
  };

  double bar = 0.0, gap = 0.0;
  for (double c : block.bar_centers) bar += line_mean(c);
  for (double c : block.gap_centers) gap += line_mean(c);
  bar /= 3.0;
  gap /= 2.0;
  const double denom = gap + bar;
  if (denom <= 0.0) return 0.0;
  return (gap - bar) / denom;  // bars are dark: positive when resolved
}

ResolvabilityReport resolvable_frequency(const ApertureModel& model,
                                         const GrayImage& target,
                                         const std::vector<UsafElement>& elements,
                                         double min_contrast) {
  if (!(min_contrast > 0))
    throw ConfigInvalid("resolvable_frequency: contrast criterion must be positive");
  const GrayImage filtered = aperture_filter(target, model);

  ResolvabilityReport report;
  for (const UsafElement& e : elements) {
    ElementContrast ec;
    ec.group = e.group;
    ec.element = e.element;
    ec.lp_per_mm = e.lp_per_mm;
    ec.contrast_h = michelson_contrast(filtered, e.horizontal);
    ec.contrast_v = michelson_contrast(filtered, e.vertical);
    ec.resolvable = ec.contrast_h > min_contrast && ec.contrast_v > min_contrast;
    if (ec.resolvable && e.lp_per_mm > report.max_lp_per_mm) {
      report.max_lp_per_mm = e.lp_per_mm;
      report.group = e.group;
      report.element = e.element;
    }
    report.elements.push_back(ec);
  }
  return report;
}

}  // namespace spi
