#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "spi/errors.hpp"

namespace spi {

// Images are dense row-major matrices so that flattening with data() walks
// rows first — the same order the pattern tiling uses.
template <typename Scalar>
using ImageOf = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GrayImage   = ImageOf<double>;   // intensities in [0, 1]
using BinaryImage = ImageOf<std::uint8_t>;

struct RgbImage {
  GrayImage r, g, b;
};

// Row-major flattening: element (r, c) lands at index r*cols + c.
inline Eigen::VectorXd vectorize(const GrayImage& img) {
  return Eigen::Map<const Eigen::VectorXd>(img.data(), img.size());
}

inline GrayImage from_vector(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw ShapeMismatch("from_vector: " + std::to_string(v.size()) + " samples into " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  GrayImage img(rows, cols);
  Eigen::Map<Eigen::VectorXd>(img.data(), img.size()) = v;
  return img;
}

// Places src at the top-left of a rows x cols canvas padded with `fill`.
inline GrayImage embed(const GrayImage& src, Eigen::Index rows, Eigen::Index cols,
                       double fill = 0.0) {
  if (src.rows() > rows || src.cols() > cols)
    throw ShapeMismatch("embed: source " + std::to_string(src.rows()) + "x" +
                        std::to_string(src.cols()) + " exceeds canvas " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  GrayImage out = GrayImage::Constant(rows, cols, fill);
  out.topLeftCorner(src.rows(), src.cols()) = src;
  return out;
}

// Averages BxB blocks; dimensions must divide evenly.
inline GrayImage block_downsample(const GrayImage& img, Eigen::Index block) {
  if (block <= 0 || img.rows() % block != 0 || img.cols() % block != 0)
    throw ShapeMismatch("block_downsample: block " + std::to_string(block) +
                        " does not tile " + std::to_string(img.rows()) + "x" +
                        std::to_string(img.cols()));
  GrayImage out(img.rows() / block, img.cols() / block);
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      out(r, c) = img.block(r * block, c * block, block, block).mean();
  return out;
}

inline void require_finite(const GrayImage& img, const char* who) {
  if (!img.allFinite())
    throw NonFiniteInput(std::string(who) + ": image contains NaN or Inf");
}

}  // namespace spi
