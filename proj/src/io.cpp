#include "spi/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace spi {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path);
  return f;
}

// --- little-endian scalar I/O -------------------------------------------

template <typename T>
void write_le(std::ofstream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& path) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw CorruptFile(path + ": truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

// --- PNG ------------------------------------------------------------------

GrayImage load_png(const std::string& path) {
  FilePtr fp = open_file(path, "rb");

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
    throw CorruptFile(path + ": not a PNG");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": libpng init failed");
  }

  std::vector<std::vector<png_byte>> row_store;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw CorruptFile(path + ": libpng decode error");
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // stored big-endian; we want host order
  png_read_update_info(png, info);

  depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  const double scale = depth == 16 ? 65535.0 : 255.0;

  row_store.assign(height, std::vector<png_byte>(png_get_rowbytes(png, info)));
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = row_store[r].data();
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  GrayImage img(height, width);
  for (png_uint_32 r = 0; r < height; ++r) {
    for (png_uint_32 c = 0; c < width; ++c) {
      double v;
      if (channels == 1) {
        v = depth == 16
                ? reinterpret_cast<const std::uint16_t*>(row_store[r].data())[c]
                : row_store[r][c];
      } else if (channels == 3) {
        double rgb[3];
        for (int k = 0; k < 3; ++k)
          rgb[k] = depth == 16
                       ? reinterpret_cast<const std::uint16_t*>(row_store[r].data())[3 * c + k]
                       : row_store[r][3 * c + k];
        v = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
      } else {
        throw UnsupportedFormat(path + ": unsupported channel count " +
                                std::to_string(channels));
      }
      img(r, c) = v / scale;
    }
  }
  return img;
}

void write_png_planes(const std::string& path, const GrayImage* planes[], int n_planes,
                      int bit_depth) {
  const Eigen::Index rows = planes[0]->rows(), cols = planes[0]->cols();
  FilePtr fp = open_file(path, "wb");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": libpng encode error");
  }

  png_init_io(png, fp.get());
  const int color = n_planes == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, png_uint_32(cols), png_uint_32(rows), bit_depth, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  // No timestamps or ancillary chunks: the same pixels must give the same bytes.
  png_write_info(png, info);

  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  const auto quantize = [&](double v) {
    return std::uint16_t(std::lround(std::clamp(v, 0.0, 1.0) * scale));
  };

  std::vector<png_byte> row(size_t(cols) * n_planes * (bit_depth / 8));
  for (Eigen::Index r = 0; r < rows; ++r) {
    size_t i = 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (int p = 0; p < n_planes; ++p) {
        const std::uint16_t q = quantize((*planes[p])(r, c));
        if (bit_depth == 16) {
          row[i++] = png_byte(q >> 8);  // PNG is big-endian on the wire
          row[i++] = png_byte(q & 0xff);
        } else {
          row[i++] = png_byte(q);
        }
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

// --- PGM (P5) ---------------------------------------------------------------

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  std::string magic;
  long width = 0, height = 0, maxval = 0;
  in >> magic;
  if (magic != "P5") throw UnsupportedFormat(path + ": expected binary PGM (P5)");
  // Header tokens may be separated by comments.
  const auto next_int = [&](long& out) {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      out = std::stol(tok);
      return;
    }
    throw CorruptFile(path + ": truncated header");
  };
  next_int(width);
  next_int(height);
  next_int(maxval);
  if (width <= 0 || height <= 0 || (maxval != 255 && maxval != 65535))
    throw UnsupportedFormat(path + ": maxval must be 255 or 65535");
  in.get();  // single whitespace after maxval

  const size_t bytes = size_t(width) * size_t(height) * (maxval == 65535 ? 2 : 1);
  std::vector<unsigned char> data(bytes);
  in.read(reinterpret_cast<char*>(data.data()), std::streamsize(bytes));
  if (!in) throw CorruptFile(path + ": truncated pixel data");

  GrayImage img(height, width);
  size_t i = 0;
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      if (maxval == 65535) {
        const unsigned v = unsigned(data[i]) << 8 | data[i + 1];  // big-endian
        img(r, c) = v / 65535.0;
        i += 2;
      } else {
        img(r, c) = data[i++] / 255.0;
      }
    }
  }
  return img;
}

void save_pgm(const GrayImage& img, const std::string& path, int bit_depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  const long maxval = bit_depth == 16 ? 65535 : 255;
  out << "P5\n" << img.cols() << " " << img.rows() << "\n" << maxval << "\n";
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      const auto q = long(std::lround(std::clamp(img(r, c), 0.0, 1.0) * maxval));
      if (bit_depth == 16) {
        out.put(char(q >> 8));
        out.put(char(q & 0xff));
      } else {
        out.put(char(q));
      }
    }
  }
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace

GrayImage load_image(const std::string& path) {
  if (ends_with(path, ".png")) return load_png(path);
  if (ends_with(path, ".pgm")) return load_pgm(path);
  throw UnsupportedFormat(path + ": only .png and .pgm are understood");
}

void save_image(const GrayImage& img, const std::string& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw UnsupportedFormat(path + ": bit depth must be 8 or 16");
  if (img.size() == 0) throw ConfigInvalid("save_image: empty image");
  if (ends_with(path, ".png")) {
    const GrayImage* planes[] = {&img};
    write_png_planes(path, planes, 1, bit_depth);
  } else if (ends_with(path, ".pgm")) {
    save_pgm(img, path, bit_depth);
  } else {
    throw UnsupportedFormat(path + ": only .png and .pgm are understood");
  }
}

void save_rgb_png(const RgbImage& img, const std::string& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw UnsupportedFormat(path + ": bit depth must be 8 or 16");
  if (img.r.size() == 0 || img.r.rows() != img.g.rows() || img.r.cols() != img.g.cols() ||
      img.r.rows() != img.b.rows() || img.r.cols() != img.b.cols())
    throw ShapeMismatch("save_rgb_png: planes differ in shape");
  if (!ends_with(path, ".png"))
    throw UnsupportedFormat(path + ": RGB output is PNG only");
  const GrayImage* planes[] = {&img.r, &img.g, &img.b};
  write_png_planes(path, planes, 3, bit_depth);
}

void save_matrix(const CyclicSMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out.write("SPI1", 4);
  write_le<std::uint32_t>(out, std::uint32_t(m.degree()));
  write_le<std::uint32_t>(out, std::uint32_t(m.pattern_rows()));
  write_le<std::uint32_t>(out, std::uint32_t(m.pattern_cols()));

  const auto& bits = m.sequence().bits;
  std::vector<unsigned char> packed((size_t(bits.size()) + 7) / 8, 0);
  for (Eigen::Index i = 0; i < bits.size(); ++i)
    if (bits[i]) packed[size_t(i) / 8] |= (unsigned char)(1u << (i % 8));
  out.write(reinterpret_cast<const char*>(packed.data()),
            std::streamsize(packed.size()));
  if (!out) throw IoError(path + ": write failed");
}

CyclicSMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SPI1", 4) != 0)
    throw CorruptFile(path + ": bad magic");
  const auto degree = read_le<std::uint32_t>(in, path);
  const auto p = read_le<std::uint32_t>(in, path);
  const auto q = read_le<std::uint32_t>(in, path);
  if (degree < std::uint32_t(kMinDegree) || degree > std::uint32_t(kMaxDegree))
    throw CorruptFile(path + ": degree " + std::to_string(degree));
  const std::uint64_t n = (std::uint64_t(1) << degree) - 1;
  if (std::uint64_t(p) * q != n)
    throw CorruptFile(path + ": " + std::to_string(p) + "x" + std::to_string(q) +
                      " != 2^" + std::to_string(degree) + "-1");

  std::vector<unsigned char> packed((n + 7) / 8);
  in.read(reinterpret_cast<char*>(packed.data()), std::streamsize(packed.size()));
  if (!in) throw CorruptFile(path + ": truncated bitstream");

  MlsSequence seq;
  seq.degree = int(degree);
  seq.bits.resize(Eigen::Index(n));
  Eigen::Index ones = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    seq.bits[Eigen::Index(i)] = (packed[size_t(i) / 8] >> (i % 8)) & 1u;
    ones += seq.bits[Eigen::Index(i)];
  }
  if (ones != Eigen::Index((n + 1) / 2))
    throw CorruptFile(path + ": row balance " + std::to_string(ones) + " ones, want " +
                      std::to_string((n + 1) / 2));
  return CyclicSMatrix(std::move(seq), Eigen::Index(p), Eigen::Index(q));
}

void save_trace(const VoltageTrace& t, const std::string& path) {
  if (t.samples.size() != t.missing.size())
    throw LengthMismatch("save_trace: samples vs flags");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out.write("SPIV", 4);
  write_le<std::uint32_t>(out, std::uint32_t(t.samples.size()));
  write_le<double>(out, t.dwell_seconds);
  write_le<std::uint32_t>(out, std::uint32_t(t.adc_bits));
  write_le<std::uint64_t>(out, t.rng_seed);
  for (Eigen::Index i = 0; i < t.samples.size(); ++i) write_le<double>(out, t.samples[i]);
  out.write(reinterpret_cast<const char*>(t.missing.data()),
            std::streamsize(t.missing.size()));
  if (!out) throw IoError(path + ": write failed");
}

VoltageTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SPIV", 4) != 0)
    throw CorruptFile(path + ": bad magic");

  VoltageTrace t;
  const auto n = read_le<std::uint32_t>(in, path);
  t.dwell_seconds = read_le<double>(in, path);
  t.adc_bits = int(read_le<std::uint32_t>(in, path));
  t.rng_seed = read_le<std::uint64_t>(in, path);
  if (n == 0 || !(t.dwell_seconds > 0))
    throw CorruptFile(path + ": bad header values");

  t.samples.resize(Eigen::Index(n));
  for (std::uint32_t i = 0; i < n; ++i)
    t.samples[Eigen::Index(i)] = read_le<double>(in, path);
  t.missing.resize(Eigen::Index(n));
  in.read(reinterpret_cast<char*>(t.missing.data()), std::streamsize(n));
  if (!in) throw CorruptFile(path + ": truncated flags");
  for (Eigen::Index i = 0; i < t.missing.size(); ++i)
    if (t.missing[i] > 1) throw CorruptFile(path + ": flag byte " + std::to_string(i));
  return t;
}

}  // namespace spi
