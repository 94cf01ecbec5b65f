#pragma once

#include <string>

#include "spi/forward.hpp"
#include "spi/image.hpp"
#include "spi/mls.hpp"

namespace spi {

// Grayscale PNG or PGM (chosen by extension), 8- or 16-bit. Color PNG inputs
// collapse to luma with the BT.601 weights (0.299, 0.587, 0.114). Saving
// clamps to [0,1] and quantizes to the requested depth; the PNG encoder is
// configured so identical pixels give identical bytes.
GrayImage load_image(const std::string& path);
void save_image(const GrayImage& img, const std::string& path, int bit_depth = 8);
void save_rgb_png(const RgbImage& img, const std::string& path, int bit_depth = 8);

// Matrix file: 16-byte header (magic "SPI1", u32 degree, u32 p, u32 q, all
// little-endian) followed by the first row packed LSB-first.
void save_matrix(const CyclicSMatrix& m, const std::string& path);
CyclicSMatrix load_matrix(const std::string& path);

// Trace file: header (magic "SPIV", u32 N, f64 dwell seconds, u32 adc_bits,
// u64 rng seed) + N f64 samples + N u8 missing flags, little-endian.
void save_trace(const VoltageTrace& t, const std::string& path);
VoltageTrace load_trace(const std::string& path);

}  // namespace spi
