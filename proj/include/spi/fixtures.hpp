#pragma once

#include <string>
#include <vector>

#include "spi/image.hpp"
#include "spi/optics.hpp"

namespace spi {

// Resolution target in the 1951 three-bar style: per element, a horizontal
// and a vertical bar triplet at lp/mm = 2^(group + (element-1)/6), dark bars
// on a bright field, plus a solid reference square. Rendering is an exact
// area average of the continuous target over each pixel, so any grid is a
// faithful downsample of the same physical chart.
struct UsafTarget {
  GrayImage image;
  std::vector<UsafElement> elements;  // bar/gap geometry in pixel coordinates
  double extent_mm = 0.0;             // physical width of the rendered field
};

UsafTarget render_usaf(Eigen::Index cols, Eigen::Index rows, double extent_mm = 4.8,
                       int group_min = 2, int group_max = 6,
                       bool reference_square = true);

// Quadruped silhouette (body, head, ears, tail, legs) as a strictly binary
// image: subject 1 on background 0.
struct Silhouette {
  GrayImage image;
  double area_fraction = 0.0;
};

Silhouette render_silhouette(Eigen::Index cols, Eigen::Index rows);

// Writes the canonical fixture set (768x768 target + silhouette, with JSON
// metadata sidecars) into outdir. Deterministic: same bytes every run.
std::vector<std::string> make_fixtures(const std::string& outdir);

}  // namespace spi
