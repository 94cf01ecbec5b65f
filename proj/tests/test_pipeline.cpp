#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "spi/fixtures.hpp"
#include "spi/io.hpp"
#include "spi/pipeline.hpp"
#include "spi/recon.hpp"

using nlohmann::json;
using spi::GrayImage;
using spi::PipelineConfig;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("spi-pipe-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

PipelineConfig quiet_config(const std::string& outdir) {
  PipelineConfig cfg;
  cfg.fixture = "silhouette";
  cfg.model.noise_sigma = 0.0;
  cfg.model.adc_bits = 0;
  cfg.outdir = outdir;
  return cfg;
}

json masked_report(const std::string& path) {
  json j = json::parse(read_bytes(path));
  j.erase("timings_ms");  // wall-clock, changes run to run by design
  return j;
}

}  // namespace

TEST_CASE("chart fixture: values span [0,1], bars dark on a bright field") {
  const auto target = spi::render_usaf(256, 256);
  CHECK(target.image.minCoeff() == 0.0);
  CHECK(target.image.maxCoeff() == 1.0);
  CHECK(target.extent_mm == doctest::Approx(4.8));
  CHECK(!target.elements.empty());
  // the field is mostly bright
  CHECK(target.image.mean() > 0.5);
}

TEST_CASE("chart renders are physically consistent across grids") {
  // the 128-px render must equal the block-averaged 512-px render exactly,
  // because both integrate the same continuous chart over pixel areas
  const auto hi = spi::render_usaf(512, 512);
  const auto lo = spi::render_usaf(128, 128);
  const GrayImage averaged = spi::block_downsample(hi.image, 4);
  CHECK((averaged - lo.image).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("silhouette fixture: strictly binary with a sensible area") {
  const auto sil = spi::render_silhouette(224, 224);
  for (Eigen::Index r = 0; r < sil.image.rows(); ++r)
    for (Eigen::Index c = 0; c < sil.image.cols(); ++c) {
      const double v = sil.image(r, c);
      CHECK((v == 0.0 || v == 1.0));
    }
  CHECK(sil.area_fraction == doctest::Approx(sil.image.mean()));
  CHECK(sil.area_fraction > 0.05);
  CHECK(sil.area_fraction < 0.6);
}

TEST_CASE("fixture writer emits the full set, byte-identically on repeat") {
  TempDir a, b;
  const auto files_a = spi::make_fixtures(a.path.string());
  const auto files_b = spi::make_fixtures(b.path.string());
  REQUIRE(files_a.size() == 4);
  REQUIRE(files_b.size() == 4);
  for (size_t i = 0; i < files_a.size(); ++i) {
    CAPTURE(files_a[i]);
    CHECK(fs::exists(files_a[i]));
    CHECK(read_bytes(files_a[i]) == read_bytes(files_b[i]));
  }
}

TEST_CASE("config loading: defaults survive, nested sections apply") {
  TempDir tmp;
  write_text(tmp.file("c.json"), R"({
    "degree": 6, "rows": 7, "cols": 9,
    "fixture": "silhouette",
    "measurement": {"noise_sigma": 0.25, "adc_bits": 0, "seed": 99},
    "sampling": {"stride": 2, "interpolation": "nearest"},
    "frame_rate_hz": 10000.0
  })");
  const PipelineConfig cfg = spi::load_config(tmp.file("c.json"));
  CHECK(cfg.degree == 6);
  CHECK(cfg.p == 7);
  CHECK(cfg.q == 9);
  CHECK(cfg.fixture == "silhouette");
  CHECK(cfg.model.noise_sigma == 0.25);
  CHECK(cfg.model.adc_bits == 0);
  CHECK(cfg.model.rng_seed == 99);
  CHECK(cfg.model.gain == 1.0);  // untouched default
  CHECK(cfg.plan.stride == 2);
  CHECK(cfg.plan.interp == spi::SamplingPlan::Interp::nearest);
  CHECK(cfg.frame_rate_hz == 10000.0);
  CHECK_FALSE(cfg.use_hpf);
  CHECK_FALSE(cfg.use_aperture);

  // the presence of a filter section switches the filter on
  write_text(tmp.file("f.json"), R"({
    "degree": 8, "rows": 15, "cols": 17,
    "filter": {"cutoff_hz": 500.0, "order": 2, "realization": "time-domain"}
  })");
  const PipelineConfig with_filter = spi::load_config(tmp.file("f.json"));
  CHECK(with_filter.use_hpf);
  CHECK(with_filter.filter.cutoff_hz == 500.0);
  CHECK(with_filter.filter.order == 2);
  CHECK(with_filter.filter.realization == spi::FilterSpec::Realization::time_domain);
}

TEST_CASE("config loading failure modes") {
  TempDir tmp;
  CHECK_THROWS_AS(spi::load_config(tmp.file("missing.json")), spi::IoError);
  write_text(tmp.file("broken.json"), "{ not json");
  CHECK_THROWS_AS(spi::load_config(tmp.file("broken.json")), spi::ConfigInvalid);
  write_text(tmp.file("badinterp.json"),
             R"({"sampling": {"interpolation": "cubic"}})");
  CHECK_THROWS_AS(spi::load_config(tmp.file("badinterp.json")), spi::ConfigInvalid);
}

TEST_CASE("config validation catches a factorization that does not multiply out") {
  PipelineConfig cfg = quiet_config(".");
  cfg.degree = 8;
  cfg.p = 15;
  cfg.q = 16;  // 240 != 255
  try {
    spi::validate(cfg);
    FAIL("expected ConfigInvalid");
  } catch (const spi::ConfigInvalid& e) {
    // the message must name the violated relation, not just reject
    CHECK(std::string(e.what()).find("2^degree-1") != std::string::npos);
  }
}

TEST_CASE("config validation sweeps the remaining fields") {
  TempDir tmp;
  auto cfg = quiet_config(tmp.path.string());
  cfg.fixture = "checkerboard";
  CHECK_THROWS_AS(spi::validate(cfg), spi::ConfigInvalid);

  cfg = quiet_config(tmp.path.string());
  cfg.crop_w = 10;  // height missing
  CHECK_THROWS_AS(spi::validate(cfg), spi::ConfigInvalid);

  cfg = quiet_config(tmp.path.string());
  cfg.crop_w = 30;
  cfg.crop_h = 10;  // wider than the 17-wide field
  CHECK_THROWS_AS(spi::validate(cfg), spi::ConfigInvalid);

  cfg = quiet_config(tmp.path.string());
  cfg.out_bit_depth = 12;
  CHECK_THROWS_AS(spi::validate(cfg), spi::ConfigInvalid);

  cfg = quiet_config(tmp.path.string());
  cfg.intensity = 0.0;
  CHECK_THROWS_AS(spi::validate(cfg), spi::ConfigInvalid);
}

TEST_CASE("noiseless end-to-end run is an exact round trip with full artifacts") {
  TempDir tmp;
  auto cfg = quiet_config(tmp.path.string());
  cfg.save_trace_file = true;

  const auto report = spi::run_pipeline(cfg);
  CHECK(report.psnr_db == spi::kPsnrCapDb);
  REQUIRE(report.ssim_value.has_value());
  CHECK(*report.ssim_value == 1.0);

  for (const char* name : {"recon.png", "trace.spiv", "report.json"}) {
    CAPTURE(name);
    CHECK(fs::exists(tmp.file(name)));
  }

  const json j = json::parse(read_bytes(tmp.file("report.json")));
  CHECK(j["schema"] == "spi-kit-report/1");
  CHECK(j["matrix"]["degree"] == 8);
  CHECK(j["matrix"]["rows"] == 15);
  CHECK(j["matrix"]["cols"] == 17);
  CHECK(j["scene"]["fixture"] == "silhouette");
  CHECK(j["measurement"]["noise_sigma"] == 0.0);
  CHECK(j["sampling"]["stride"] == 1);
  CHECK(j["metrics"]["psnr_db"] == spi::kPsnrCapDb);
  CHECK(j["acquisition"]["pattern_seconds"].get<double>() ==
        doctest::Approx(255.0 / 22727.0));
  CHECK(j.contains("timings_ms"));
  CHECK(j["timings_ms"].contains("reconstruct"));
}

TEST_CASE("a user image runs through the same path") {
  TempDir tmp;
  GrayImage small(8, 11);
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> byte(0, 255);
  for (Eigen::Index r = 0; r < 8; ++r)
    for (Eigen::Index c = 0; c < 11; ++c) small(r, c) = byte(rng) / 255.0;
  spi::save_image(small, tmp.file("scene.png"));

  auto cfg = quiet_config(tmp.file("out"));
  cfg.image_path = tmp.file("scene.png");
  cfg.crop_w = 11;
  cfg.crop_h = 8;
  const auto report = spi::run_pipeline(cfg);
  CHECK(report.psnr_db == spi::kPsnrCapDb);  // noiseless: still exact
  CHECK_FALSE(report.ssim_value.has_value());  // 8 < default window

  const json j = json::parse(read_bytes(tmp.file("out/report.json")));
  CHECK(j["metrics"]["ssim"].is_null());
  CHECK(j["crop"]["width"] == 11);
  CHECK(j["crop"]["height"] == 8);

  // the written reconstruction matches the input scene pixel for pixel
  const GrayImage out = spi::load_image(tmp.file("out/recon.png"));
  // recon.png holds the full field; the crop applies to metrics only
  CHECK((spi::crop_active(out, 11, 8) - small).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("an image larger than the pattern field is refused") {
  TempDir tmp;
  spi::save_image(GrayImage::Zero(20, 20), tmp.file("big.png"));
  auto cfg = quiet_config(tmp.path.string());
  cfg.image_path = tmp.file("big.png");
  CHECK_THROWS_AS(spi::run_pipeline(cfg), spi::ConfigInvalid);
}

TEST_CASE("strided run reports a finite quality and honest acquisition time") {
  TempDir tmp;
  auto cfg = quiet_config(tmp.path.string());
  cfg.plan.stride = 4;
  const auto report = spi::run_pipeline(cfg);
  CHECK(report.psnr_db < spi::kPsnrCapDb);
  CHECK(report.psnr_db > 5.0);
  CHECK(report.acquisition.pattern_seconds ==
        doctest::Approx(64.0 / 22727.0));  // ceil(255/4) patterns
}

TEST_CASE("filtered run writes an edge map and scores against filtered truth") {
  TempDir tmp;
  auto cfg = quiet_config(tmp.path.string());
  cfg.use_hpf = true;
  cfg.filter.cutoff_hz = 4.0 / (cfg.model.dwell_seconds * 255.0);
  const auto report = spi::run_pipeline(cfg);
  CHECK(fs::exists(tmp.file("edges.png")));
  // dft realization keeps the equivalence exact, so the score caps out
  CHECK(report.psnr_db == spi::kPsnrCapDb);

  const json j = json::parse(read_bytes(tmp.file("report.json")));
  CHECK(j["filter"]["cutoff_hz"].get<double>() == doctest::Approx(cfg.filter.cutoff_hz));
}

TEST_CASE("intensity scaling does not break the exact round trip") {
  TempDir tmp;
  auto cfg = quiet_config(tmp.path.string());
  cfg.intensity = 3.0;
  const auto report = spi::run_pipeline(cfg);
  CHECK(report.psnr_db == spi::kPsnrCapDb);
  // the written png is normalized back to the unit range
  const GrayImage out = spi::load_image(tmp.file("recon.png"));
  CHECK(out.maxCoeff() <= 1.0);
}

TEST_CASE("two runs with one config produce identical bytes") {
  TempDir a, b;
  auto cfg_a = quiet_config(a.path.string());
  cfg_a.model.noise_sigma = 0.4;  // nontrivial noise, same seed
  cfg_a.save_trace_file = true;
  auto cfg_b = cfg_a;
  cfg_b.outdir = b.path.string();

  spi::run_pipeline(cfg_a);
  spi::run_pipeline(cfg_b);

  CHECK(read_bytes(a.path / "recon.png") == read_bytes(b.path / "recon.png"));
  CHECK(read_bytes(a.path / "trace.spiv") == read_bytes(b.path / "trace.spiv"));

  // reports agree on everything except wall-clock timings and paths
  json ja = masked_report((a.path / "report.json").string());
  json jb = masked_report((b.path / "report.json").string());
  ja.erase("artifacts");
  jb.erase("artifacts");
  ja["output"].erase("outdir");
  jb["output"].erase("outdir");
  CHECK(ja == jb);
}
