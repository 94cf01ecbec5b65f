#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "spi/forward.hpp"
#include "spi/io.hpp"
#include "spi/recon.hpp"

using spi::CyclicSMatrix;
using spi::GrayImage;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("spi-io-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

GrayImage quantized_image(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                          int levels) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, levels - 1);
  GrayImage img(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      img(r, c) = double(d(rng)) / double(levels - 1);
  return img;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void corrupt_truncate(const std::string& src, const std::string& dst, size_t keep) {
  const std::string bytes = read_bytes(src);
  std::ofstream out(dst, std::ios::binary);
  out.write(bytes.data(), std::streamsize(std::min(keep, bytes.size())));
}

}  // namespace

TEST_CASE("8-bit png round trip preserves pixels on the 255 grid") {
  TempDir tmp;
  const GrayImage img = quantized_image(13, 19, 1, 256);
  spi::save_image(img, tmp.file("a.png"));
  const GrayImage back = spi::load_image(tmp.file("a.png"));
  CHECK((back - img).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("16-bit png round trip preserves pixels on the 65535 grid") {
  TempDir tmp;
  const GrayImage img = quantized_image(9, 9, 2, 65536);
  spi::save_image(img, tmp.file("a16.png"), 16);
  const GrayImage back = spi::load_image(tmp.file("a16.png"));
  CHECK((back - img).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pgm round trips at both depths") {
  TempDir tmp;
  const GrayImage img8 = quantized_image(7, 11, 3, 256);
  spi::save_image(img8, tmp.file("a.pgm"));
  CHECK((spi::load_image(tmp.file("a.pgm")) - img8).cwiseAbs().maxCoeff() < 1e-12);

  const GrayImage img16 = quantized_image(7, 11, 4, 65536);
  spi::save_image(img16, tmp.file("b.pgm"), 16);
  CHECK((spi::load_image(tmp.file("b.pgm")) - img16).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("saving clamps out-of-range values instead of wrapping") {
  TempDir tmp;
  GrayImage img(1, 3);
  img << -0.5, 0.5, 1.7;
  spi::save_image(img, tmp.file("c.png"));
  const GrayImage back = spi::load_image(tmp.file("c.png"));
  CHECK(back(0, 0) == 0.0);
  CHECK(back(0, 1) == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(back(0, 2) == 1.0);
}

TEST_CASE("color png collapses to luma on load") {
  TempDir tmp;
  spi::RgbImage rgb{GrayImage::Constant(4, 4, 1.0), GrayImage::Zero(4, 4),
                    GrayImage::Zero(4, 4)};
  spi::save_rgb_png(rgb, tmp.file("red.png"));
  const GrayImage luma = spi::load_image(tmp.file("red.png"));
  CHECK(luma(0, 0) == doctest::Approx(0.299).epsilon(1e-2));

  spi::RgbImage white{GrayImage::Ones(4, 4), GrayImage::Ones(4, 4),
                      GrayImage::Ones(4, 4)};
  spi::save_rgb_png(white, tmp.file("white.png"));
  CHECK(spi::load_image(tmp.file("white.png"))(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("png encoding is byte-deterministic") {
  TempDir tmp;
  const GrayImage img = quantized_image(16, 16, 5, 256);
  spi::save_image(img, tmp.file("d1.png"));
  spi::save_image(img, tmp.file("d2.png"));
  CHECK(read_bytes(tmp.file("d1.png")) == read_bytes(tmp.file("d2.png")));
}

TEST_CASE("matrix file round trip reproduces the matrix exactly") {
  TempDir tmp;
  const auto m = CyclicSMatrix::from_degree(8, 15, 17);
  spi::save_matrix(m, tmp.file("m.spi1"));
  const auto back = spi::load_matrix(tmp.file("m.spi1"));
  CHECK(back.degree() == 8);
  CHECK(back.pattern_rows() == 15);
  CHECK(back.pattern_cols() == 17);
  CHECK((back.first_row() - m.first_row()).cwiseAbs().maxCoeff() == 0.0);

  // file size: 16-byte header + ceil(255/8) bit bytes
  CHECK(fs::file_size(tmp.file("m.spi1")) == 16 + 32);
}

TEST_CASE("trace file round trip preserves samples, flags and settings") {
  TempDir tmp;
  const auto m = CyclicSMatrix::from_degree(6, 7, 9);
  spi::MeasurementModel model;
  model.noise_sigma = 0.01;
  model.rng_seed = 0xabcdef;
  spi::SamplingPlan plan;
  plan.stride = 3;
  const auto trace =
      spi::measure_planned(m, quantized_image(7, 9, 6, 256), model, plan);

  spi::save_trace(trace, tmp.file("t.spiv"));
  const auto back = spi::load_trace(tmp.file("t.spiv"));
  CHECK(back.length() == trace.length());
  CHECK((back.samples - trace.samples).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.missing.cast<int>() - trace.missing.cast<int>()).cwiseAbs().maxCoeff() == 0);
  CHECK(back.dwell_seconds == trace.dwell_seconds);
  CHECK(back.adc_bits == trace.adc_bits);
  CHECK(back.rng_seed == trace.rng_seed);
  CHECK(back.measured_count() == trace.measured_count());
}

TEST_CASE("unknown extensions are refused") {
  TempDir tmp;
  CHECK_THROWS_AS(spi::save_image(GrayImage::Zero(2, 2), tmp.file("x.bmp")),
                  spi::UnsupportedFormat);
  CHECK_THROWS_AS(spi::load_image(tmp.file("x.tiff")), spi::UnsupportedFormat);
}

TEST_CASE("missing files raise io errors") {
  CHECK_THROWS_AS(spi::load_image("/nonexistent/nope.png"), spi::IoError);
  CHECK_THROWS_AS(spi::load_matrix("/nonexistent/nope.spi1"), spi::IoError);
  CHECK_THROWS_AS(spi::load_trace("/nonexistent/nope.spiv"), spi::IoError);
}

TEST_CASE("truncated files are reported corrupt, not misread") {
  TempDir tmp;
  const auto m = CyclicSMatrix::from_degree(6, 7, 9);
  spi::save_matrix(m, tmp.file("m.spi1"));
  corrupt_truncate(tmp.file("m.spi1"), tmp.file("m_cut.spi1"), 20);
  CHECK_THROWS_AS(spi::load_matrix(tmp.file("m_cut.spi1")), spi::CorruptFile);

  const auto trace = spi::measure_full(m, quantized_image(7, 9, 7, 256),
                                       spi::MeasurementModel{});
  spi::save_trace(trace, tmp.file("t.spiv"));
  corrupt_truncate(tmp.file("t.spiv"), tmp.file("t_cut.spiv"), 100);
  CHECK_THROWS_AS(spi::load_trace(tmp.file("t_cut.spiv")), spi::CorruptFile);

  // header shorter than the magic
  corrupt_truncate(tmp.file("m.spi1"), tmp.file("m_tiny.spi1"), 3);
  CHECK_THROWS_AS(spi::load_matrix(tmp.file("m_tiny.spi1")), spi::CorruptFile);
}

TEST_CASE("wrong magic is rejected up front") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("bad.spi1"), std::ios::binary);
    out << "NOPE" << std::string(44, '\0');
  }
  CHECK_THROWS_AS(spi::load_matrix(tmp.file("bad.spi1")), spi::CorruptFile);
  {
    std::ofstream out(tmp.file("bad.spiv"), std::ios::binary);
    out << "NOPE" << std::string(60, '\0');
  }
  CHECK_THROWS_AS(spi::load_trace(tmp.file("bad.spiv")), spi::CorruptFile);
  {
    std::ofstream out(tmp.file("bad.png"), std::ios::binary);
    out << "not a png at all";
  }
  CHECK_THROWS_AS(spi::load_image(tmp.file("bad.png")), spi::CorruptFile);
}

TEST_CASE("matrix header fields are validated against each other") {
  TempDir tmp;
  const auto m = CyclicSMatrix::from_degree(4, 3, 5);
  spi::save_matrix(m, tmp.file("m.spi1"));
  std::string bytes = read_bytes(tmp.file("m.spi1"));
  // p*q must equal 2^degree - 1; break p (little-endian u32 at offset 8)
  bytes[8] = 4;
  {
    std::ofstream out(tmp.file("m_bad.spi1"), std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
  }
  CHECK_THROWS_AS(spi::load_matrix(tmp.file("m_bad.spi1")), spi::CorruptFile);
}

TEST_CASE("a tampered bit row fails the balance check") {
  TempDir tmp;
  const auto m = CyclicSMatrix::from_degree(4, 3, 5);
  spi::save_matrix(m, tmp.file("m.spi1"));
  std::string bytes = read_bytes(tmp.file("m.spi1"));
  bytes[16] = char(bytes[16] ^ 0x01);  // flip the first sequence bit
  {
    std::ofstream out(tmp.file("m_flip.spi1"), std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
  }
  CHECK_THROWS_AS(spi::load_matrix(tmp.file("m_flip.spi1")), spi::CorruptFile);
}

TEST_CASE("pgm headers with comments still parse") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("c.pgm"), std::ios::binary);
    out << "P5\n# a comment line\n3 2\n255\n";
    const unsigned char px[6] = {0, 128, 255, 64, 32, 16};
    out.write(reinterpret_cast<const char*>(px), 6);
  }
  const GrayImage img = spi::load_image(tmp.file("c.pgm"));
  CHECK(img.rows() == 2);
  CHECK(img.cols() == 3);
  CHECK(img(0, 0) == 0.0);
  CHECK(img(0, 2) == 1.0);
  CHECK(img(1, 0) == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("trace round trip through measurement and reconstruction still works") {
  TempDir tmp;
  const auto m = CyclicSMatrix::from_degree(8, 15, 17);
  spi::MeasurementModel model;
  model.noise_sigma = 0.0;
  model.adc_bits = 0;
  const GrayImage img = quantized_image(15, 17, 10, 256);
  const auto trace = spi::measure_full(m, img, model);
  spi::save_trace(trace, tmp.file("rt.spiv"));
  spi::save_matrix(m, tmp.file("rt.spi1"));

  const auto m2 = spi::load_matrix(tmp.file("rt.spi1"));
  const auto t2 = spi::load_trace(tmp.file("rt.spiv"));
  // the loaded pair reconstructs the original scene
  const GrayImage back = spi::reconstruct(m2, t2);
  CHECK((back - img).cwiseAbs().maxCoeff() < 1e-9);
}
