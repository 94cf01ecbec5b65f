#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spi/color.hpp"

using spi::GrayImage;
using spi::SpectralChannel;

namespace {

SpectralChannel delta_channel(double nm, GrayImage img, double gain = 1.0) {
  SpectralChannel ch;
  ch.center_wavelength_nm = nm;
  ch.spectrum = spi::monochromatic_spectrum(nm);
  ch.image = std::move(img);
  ch.gain = gain;
  return ch;
}

}  // namespace

TEST_CASE("observer table: 81 rows, 5 nm grid, luminosity peaks at 555") {
  const auto& cmf = spi::cie_1931_cmf();
  REQUIRE(cmf.size() == 81);
  CHECK(cmf.wavelength_nm[0] == 380.0);
  CHECK(cmf.wavelength_nm[80] == 780.0);
  for (Eigen::Index i = 1; i < 81; ++i)
    CHECK(cmf.wavelength_nm[i] - cmf.wavelength_nm[i - 1] == 5.0);

  Eigen::Index peak;
  cmf.ybar.maxCoeff(&peak);
  CHECK(cmf.wavelength_nm[peak] == 555.0);
  CHECK(cmf.ybar[peak] == 1.0);
  // nothing negative anywhere
  CHECK(cmf.xbar.minCoeff() >= 0.0);
  CHECK(cmf.ybar.minCoeff() >= 0.0);
  CHECK(cmf.zbar.minCoeff() >= 0.0);
}

TEST_CASE("a delta line sifts the observer curves exactly") {
  const auto& cmf = spi::cie_1931_cmf();
  for (double nm : {445.0, 555.0, 600.0}) {
    CAPTURE(nm);
    SpectralChannel ch = delta_channel(nm, GrayImage::Ones(1, 1));
    const spi::Xyz xyz = spi::channel_to_xyz(ch);
    Eigen::Index k = Eigen::Index((nm - 380.0) / 5.0);
    CHECK(xyz.x == doctest::Approx(cmf.xbar[k]).epsilon(1e-12));
    CHECK(xyz.y == doctest::Approx(cmf.ybar[k]).epsilon(1e-12));
    CHECK(xyz.z == doctest::Approx(cmf.zbar[k]).epsilon(1e-12));
  }
  // off-grid center snaps to the nearest sample
  SpectralChannel ch = delta_channel(556.9, GrayImage::Ones(1, 1));
  const spi::Xyz xyz = spi::channel_to_xyz(ch);
  CHECK(xyz.y == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the eye barely registers 780 nm") {
  SpectralChannel ch = delta_channel(780.0, GrayImage::Ones(1, 1));
  const spi::Xyz xyz = spi::channel_to_xyz(ch);
  CHECK(xyz.y < 1e-4);
  CHECK(xyz.x < 1e-3);
}

TEST_CASE("narrowband lines integrate to unit power") {
  const auto& cmf = spi::cie_1931_cmf();
  for (double nm : {450.0, 565.0, 700.0}) {
    const Eigen::VectorXd s = spi::gaussian_spectrum(nm, 25.0);
    double integral = 0.0;
    for (Eigen::Index i = 0; i + 1 < s.size(); ++i)
      integral += 0.5 * (s[i] + s[i + 1]) * 5.0;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-12));
    // line shape peaks at its center
    Eigen::Index peak;
    s.maxCoeff(&peak);
    CHECK(cmf.wavelength_nm[peak] == nm);
  }
}

TEST_CASE("an equal-energy spectrum lands at the white point") {
  const auto& cmf = spi::cie_1931_cmf();
  SpectralChannel ch;
  ch.spectrum = Eigen::VectorXd::Constant(cmf.size(), 1.0 / 400.0);
  ch.image = GrayImage::Ones(1, 1);
  const spi::Xyz xyz = spi::channel_to_xyz(ch);
  const double sum = xyz.x + xyz.y + xyz.z;
  CHECK(xyz.x / sum == doctest::Approx(1.0 / 3.0).epsilon(5e-3));
  CHECK(xyz.y / sum == doctest::Approx(1.0 / 3.0).epsilon(5e-3));
}

TEST_CASE("blue line: Z dominates; green line: Y strong; red line: X dominates") {
  SpectralChannel blue = spi::make_channel(450.0, GrayImage::Ones(1, 1));
  const spi::Xyz b = spi::channel_to_xyz(blue);
  CHECK(b.z > b.x);
  CHECK(b.z > b.y);

  SpectralChannel green = spi::make_channel(555.0, GrayImage::Ones(1, 1));
  const spi::Xyz g = spi::channel_to_xyz(green);
  CHECK(g.y > g.z);

  SpectralChannel red = spi::make_channel(630.0, GrayImage::Ones(1, 1));
  const spi::Xyz r = spi::channel_to_xyz(red);
  CHECK(r.x > r.y);
  CHECK(r.x > 10.0 * r.z);
}

TEST_CASE("the sRGB matrix maps D65 white to equal channels") {
  const Eigen::Vector3d d65(0.95047, 1.0, 1.08883);
  const Eigen::Vector3d rgb = spi::xyz_to_linear_srgb() * d65;
  CHECK(rgb[0] == doctest::Approx(1.0).epsilon(2e-4));
  CHECK(rgb[1] == doctest::Approx(1.0).epsilon(2e-4));
  CHECK(rgb[2] == doctest::Approx(1.0).epsilon(2e-4));
}

TEST_CASE("gamma encode and decode are inverses") {
  for (double gamma : {1.0, 1.8, 2.2, 2.4}) {
    for (double v : {0.0, 0.1, 0.5, 0.9, 1.0}) {
      CHECK(spi::gamma_decode(spi::gamma_encode(v, gamma), gamma) ==
            doctest::Approx(v).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(spi::gamma_encode(0.5, 0.0), spi::BadGamma);
  CHECK_THROWS_AS(spi::gamma_decode(0.5, -2.2), spi::BadGamma);
}

TEST_CASE("fusing three channels colors each region by its source") {
  // left third lit at 630 nm, middle at 555 nm, right at 450 nm
  GrayImage left = GrayImage::Zero(4, 9), mid = GrayImage::Zero(4, 9),
            right = GrayImage::Zero(4, 9);
  left.block(0, 0, 4, 3).setOnes();
  mid.block(0, 3, 4, 3).setOnes();
  right.block(0, 6, 4, 3).setOnes();

  const spi::RgbImage out = spi::fuse_rgb({spi::make_channel(630.0, left),
                                           spi::make_channel(555.0, mid),
                                           spi::make_channel(450.0, right)});
  // red region: r channel dominant
  CHECK(out.r(0, 0) > out.g(0, 0));
  CHECK(out.r(0, 0) > out.b(0, 0));
  // green region
  CHECK(out.g(0, 4) > out.r(0, 4));
  CHECK(out.g(0, 4) > out.b(0, 4));
  // blue region
  CHECK(out.b(0, 8) > out.r(0, 8));
  CHECK(out.b(0, 8) > out.g(0, 8));
  // encoded output stays in range and peaks at full scale
  const double peak = std::max({out.r.maxCoeff(), out.g.maxCoeff(), out.b.maxCoeff()});
  CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::min({out.r.minCoeff(), out.g.minCoeff(), out.b.minCoeff()}) >= 0.0);
}

TEST_CASE("fusion is monotone in the channel intensities") {
  GrayImage ramp(1, 5);
  ramp << 0.0, 0.25, 0.5, 0.75, 1.0;
  const spi::RgbImage out = spi::fuse_rgb({spi::make_channel(630.0, ramp),
                                           spi::make_channel(555.0, GrayImage::Zero(1, 5)),
                                           spi::make_channel(450.0, GrayImage::Zero(1, 5))});
  for (Eigen::Index c = 1; c < 5; ++c) CHECK(out.r(0, c) > out.r(0, c - 1));
}

TEST_CASE("near-IR channel needs a display gain to show up next to visible light") {
  GrayImage left = GrayImage::Zero(2, 4), right = GrayImage::Zero(2, 4);
  left.block(0, 0, 2, 2).setOnes();
  right.block(0, 2, 2, 2).setOnes();
  const GrayImage dark = GrayImage::Zero(2, 4);

  // unity gain: the 780 nm side is invisible next to the 565 nm side
  const spi::RgbImage dim = spi::fuse_rgb({spi::make_channel(780.0, left),
                                           spi::make_channel(565.0, right),
                                           spi::make_channel(450.0, dark)});
  const double lit_dim =
      std::max({dim.r(0, 0), dim.g(0, 0), dim.b(0, 0)});
  CHECK(lit_dim < 0.05);

  // with a large gain the same channel becomes plainly visible
  const spi::RgbImage boosted = spi::fuse_rgb({spi::make_channel(780.0, left, 25.0, 5e4),
                                               spi::make_channel(565.0, right),
                                               spi::make_channel(450.0, dark)});
  const double lit_boosted =
      std::max({boosted.r(0, 0), boosted.g(0, 0), boosted.b(0, 0)});
  CHECK(lit_boosted > 0.2);
}

TEST_CASE("all-dark channels fuse to a black image, not a crash") {
  const GrayImage z = GrayImage::Zero(3, 3);
  const spi::RgbImage out = spi::fuse_rgb(
      {spi::make_channel(630.0, z), spi::make_channel(555.0, z),
       spi::make_channel(450.0, z)});
  CHECK(out.r.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.g.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(spi::gaussian_spectrum(565.0, 0.0), spi::ConfigInvalid);
  // a line centered far outside the grid has no representable power
  CHECK_THROWS_AS(spi::gaussian_spectrum(2000.0, 25.0), spi::ConfigInvalid);

  SpectralChannel bad;
  bad.spectrum = Eigen::VectorXd::Ones(10);  // wrong grid length
  bad.image = GrayImage::Ones(1, 1);
  CHECK_THROWS_AS(spi::channel_to_xyz(bad), spi::GridMismatch);

  SpectralChannel neg;
  neg.spectrum = Eigen::VectorXd::Constant(81, -1.0);
  neg.image = GrayImage::Ones(1, 1);
  CHECK_THROWS_AS(spi::channel_to_xyz(neg), spi::GridMismatch);

  // channels must be co-registered
  CHECK_THROWS_AS(spi::fuse_rgb({spi::make_channel(630.0, GrayImage::Zero(2, 2)),
                                 spi::make_channel(555.0, GrayImage::Zero(3, 2)),
                                 spi::make_channel(450.0, GrayImage::Zero(2, 2))}),
                  spi::ShapeMismatch);

  CHECK_THROWS_AS(spi::fuse_rgb({spi::make_channel(630.0, GrayImage::Zero(2, 2)),
                                 spi::make_channel(555.0, GrayImage::Zero(2, 2)),
                                 spi::make_channel(450.0, GrayImage::Zero(2, 2))},
                                spi::cie_1931_cmf(), 0.0),
                  spi::BadGamma);
}
