#pragma once

#include <array>
#include <vector>

#include "spi/image.hpp"

namespace spi {

// Finite detector sitting in the Fourier plane of a lens: everything the
// aperture clips is lost, so the detector size sets a spatial-frequency
// cutoff. Frequency nu maps to physical position x = lambda * f * nu.
struct ApertureModel {
  double detector_side_um = 170.0;  // square aperture edge (or diameter if circular)
  bool circular = false;
  double na_diameter_um = 0.0;  // optional outer NA-limit circle; 0 disables
  double wavelength_um = 0.565;
  double focal_mm = 4.0;
  double object_extent_mm = 4.8;  // physical width the image columns span
};

void validate(const ApertureModel& model);

// Physical size of one Fourier-plane sample and of the whole sampled plane.
// Pixels are square in the object plane, so the full extent is the same both
// axes: lambda * f / pixel_pitch.
struct FourierScale {
  double step_x_um = 0.0, step_y_um = 0.0;
  double extent_um = 0.0;
};
FourierScale fourier_scale(const ApertureModel& model, Eigen::Index rows,
                           Eigen::Index cols);

struct FourierPlaneMap {
  Eigen::MatrixXd intensity;  // |F|^2 / (lambda*f)^2, DC at (rows/2, cols/2)
  FourierScale scale;
};

FourierPlaneMap fourier_plane_intensity(const GrayImage& img, const ApertureModel& model);

// Masks the centered spectrum with the detector aperture (and the NA circle
// when enabled), transforms back, clips to [0, 1].
GrayImage aperture_filter(const GrayImage& img, const ApertureModel& model);

// Hard cutoff the aperture implies: half the detector side at x = lambda*f*nu,
// in line pairs per mm.
double cutoff_lp_per_mm(const ApertureModel& model);

// One three-bar resolution block: where its bars and gaps sit in the image,
// in (possibly fractional) pixel coordinates.
struct BarBlock {
  int axis = 0;  // 0: modulation along columns (vertical bars); 1: along rows
  std::array<double, 3> bar_centers{};
  std::array<double, 2> gap_centers{};
  double span_lo = 0.0, span_hi = 0.0;  // extent along the bar direction
};

struct UsafElement {
  int group = 0;
  int element = 0;
  double lp_per_mm = 0.0;
  BarBlock horizontal, vertical;
};

// Michelson contrast (gap - bar)/(gap + bar) of the block's mean profiles;
// negative when the bars invert, which counts as unresolved.
double michelson_contrast(const GrayImage& img, const BarBlock& block);

struct ElementContrast {
  int group = 0;
  int element = 0;
  double lp_per_mm = 0.0;
  double contrast_h = 0.0, contrast_v = 0.0;
  bool resolvable = false;
};

struct ResolvabilityReport {
  std::vector<ElementContrast> elements;
  double max_lp_per_mm = 0.0;  // 0 when nothing is resolvable
  int group = 0, element = 0;
};

// Filters the target through the aperture and finds the finest element whose
// bars survive in both orientations above the contrast criterion.
ResolvabilityReport resolvable_frequency(const ApertureModel& model,
                                         const GrayImage& target,
                                         const std::vector<UsafElement>& elements,
                                         double min_contrast = 0.1);

}  // namespace spi
