#include "spi/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "spi/fixtures.hpp"
#include "spi/io.hpp"
#include "spi/recon.hpp"

namespace spi {

namespace {

using nlohmann::json;

// Pull a field if present, leaving the default otherwise.
template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SamplingPlan::Interp parse_interp(const std::string& s) {
  if (s == "linear") return SamplingPlan::Interp::linear;
  if (s == "nearest") return SamplingPlan::Interp::nearest;
  throw ConfigInvalid("config: interpolation must be linear|nearest, got " + s);
}

FilterSpec::Realization parse_realization(const std::string& s) {
  if (s == "dft-multiply") return FilterSpec::Realization::dft_multiply;
  if (s == "time-domain") return FilterSpec::Realization::time_domain;
  throw ConfigInvalid("config: realization must be dft-multiply|time-domain, got " + s);
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(path + ": " + e.what());
  }

  PipelineConfig cfg;
  maybe(j, "degree", cfg.degree);
  long long p = cfg.p, q = cfg.q;
  maybe(j, "rows", p);
  maybe(j, "cols", q);
  cfg.p = p;
  cfg.q = q;
  maybe(j, "image", cfg.image_path);
  maybe(j, "fixture", cfg.fixture);
  maybe(j, "intensity", cfg.intensity);

  if (j.contains("measurement")) {
    const json& m = j["measurement"];
    maybe(m, "gain", cfg.model.gain);
    maybe(m, "noise_sigma", cfg.model.noise_sigma);
    maybe(m, "adc_bits", cfg.model.adc_bits);
    maybe(m, "adc_full_scale", cfg.model.adc_full_scale);
    maybe(m, "dwell_seconds", cfg.model.dwell_seconds);
    maybe(m, "seed", cfg.model.rng_seed);
  }
  if (j.contains("sampling")) {
    const json& s = j["sampling"];
    long long stride = cfg.plan.stride;
    maybe(s, "stride", stride);
    cfg.plan.stride = stride;
    std::string interp = "linear";
    maybe(s, "interpolation", interp);
    cfg.plan.interp = parse_interp(interp);
  }
  if (j.contains("filter")) {
    cfg.use_hpf = true;
    const json& f = j["filter"];
    maybe(f, "cutoff_hz", cfg.filter.cutoff_hz);
    maybe(f, "order", cfg.filter.order);
    std::string realization = "dft-multiply";
    maybe(f, "realization", realization);
    cfg.filter.realization = parse_realization(realization);
  }
  if (j.contains("aperture")) {
    cfg.use_aperture = true;
    const json& a = j["aperture"];
    maybe(a, "detector_um", cfg.aperture.detector_side_um);
    maybe(a, "circular", cfg.aperture.circular);
    maybe(a, "na_diameter_um", cfg.aperture.na_diameter_um);
    maybe(a, "wavelength_um", cfg.aperture.wavelength_um);
    maybe(a, "focal_mm", cfg.aperture.focal_mm);
    maybe(a, "extent_mm", cfg.aperture.object_extent_mm);
  }
  if (j.contains("crop")) {
    long long w = 0, h = 0;
    maybe(j["crop"], "width", w);
    maybe(j["crop"], "height", h);
    cfg.crop_w = w;
    cfg.crop_h = h;
  }
  maybe(j, "frame_rate_hz", cfg.frame_rate_hz);
  maybe(j, "overhead_factor", cfg.overhead_factor);
  maybe(j, "outdir", cfg.outdir);
  maybe(j, "out_bit_depth", cfg.out_bit_depth);
  maybe(j, "save_trace", cfg.save_trace_file);
  return cfg;
}

void validate(const PipelineConfig& cfg) {
  if (cfg.degree < kMinDegree || cfg.degree > kMaxDegree)
    throw ConfigInvalid("config: degree " + std::to_string(cfg.degree) +
                        " outside [2, 20]");
  const auto n = (Eigen::Index(1) << cfg.degree) - 1;
  if (cfg.p < 1 || cfg.q < 1 || cfg.p * cfg.q != n)
    throw ConfigInvalid("config: rows*cols = " + std::to_string(cfg.p) + "*" +
                        std::to_string(cfg.q) + " must equal 2^degree-1 = " +
                        std::to_string(n));
  if (!(cfg.intensity > 0)) throw ConfigInvalid("config: intensity must be positive");
  if (cfg.fixture != "usaf" && cfg.fixture != "silhouette")
    throw ConfigInvalid("config: fixture must be usaf|silhouette, got " + cfg.fixture);
  validate(cfg.model);
  validate(cfg.plan, n);
  if (cfg.use_hpf) validate(cfg.filter, cfg.model.dwell_seconds, n);
  if (cfg.use_aperture) validate(cfg.aperture);
  if ((cfg.crop_w == 0) != (cfg.crop_h == 0))
    throw ConfigInvalid("config: crop width and height must be set together");
  if (cfg.crop_w > cfg.q || cfg.crop_h > cfg.p)
    throw ConfigInvalid("config: crop " + std::to_string(cfg.crop_w) + "x" +
                        std::to_string(cfg.crop_h) + " exceeds field " +
                        std::to_string(cfg.q) + "x" + std::to_string(cfg.p));
  if (!(cfg.frame_rate_hz > 0))
    throw ConfigInvalid("config: frame_rate_hz must be positive");
  if (cfg.overhead_factor < 1.0)
    throw ConfigInvalid("config: overhead_factor must be >= 1");
  if (cfg.out_bit_depth != 8 && cfg.out_bit_depth != 16)
    throw ConfigInvalid("config: out_bit_depth must be 8 or 16");
}

RunReport run_pipeline(const PipelineConfig& cfg) {
  validate(cfg);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.outdir, ec);
  if (ec) throw IoError("run: cannot create " + cfg.outdir);

  RunReport report;
  report.config = cfg;

  using clock = std::chrono::steady_clock;
  auto mark = clock::now();
  const auto lap = [&](const char* stage) {
    const auto now = clock::now();
    report.timings.push_back(
        {stage, std::chrono::duration<double, std::milli>(now - mark).count()});
    mark = now;
  };

  const CyclicSMatrix matrix = CyclicSMatrix::from_degree(cfg.degree, cfg.p, cfg.q);
  lap("generate");

  GrayImage scene;
  if (!cfg.image_path.empty()) {
    GrayImage loaded = load_image(cfg.image_path);
    if (loaded.rows() > cfg.p || loaded.cols() > cfg.q)
      throw ConfigInvalid("config: image " + std::to_string(loaded.rows()) + "x" +
                          std::to_string(loaded.cols()) + " exceeds field " +
                          std::to_string(cfg.p) + "x" + std::to_string(cfg.q));
    scene = embed(loaded, cfg.p, cfg.q);
  } else if (cfg.fixture == "usaf") {
    scene = render_usaf(cfg.q, cfg.p, 4.8).image;
  } else {
    scene = render_silhouette(cfg.q, cfg.p).image;
  }
  lap("scene");

  if (cfg.use_aperture) {
    scene = aperture_filter(scene, cfg.aperture);
    lap("aperture");
  }
  scene *= cfg.intensity;

  VoltageTrace trace = measure_planned(matrix, scene, cfg.model, cfg.plan);
  lap("measure");

  trace = interpolate_trace(trace);
  lap("interpolate");

  if (cfg.use_hpf) {
    trace = hpf_trace(trace, cfg.filter);
    lap("filter");
  }

  GrayImage recon = reconstruct(matrix, trace, cfg.model.gain);
  lap("reconstruct");

  GrayImage truth = scene;
  if (cfg.crop_w > 0) {
    recon = crop_active(recon, cfg.crop_w, cfg.crop_h);
    truth = crop_active(truth, cfg.crop_w, cfg.crop_h);
    lap("crop");
  }

  // Metrics are meaningful for straight reconstructions; under the HPF the
  // output is a gradient field, so compare against the equally-filtered scene.
  if (cfg.use_hpf)
    truth = crop_active(spatial_hpf(scene, cfg.filter, cfg.model.dwell_seconds,
                                    matrix.n()),
                        truth.cols(), truth.rows());
  const double peak = std::max(cfg.intensity, 1.0);
  report.psnr_db = psnr(truth, recon, peak);
  if (std::min(recon.rows(), recon.cols()) >= SsimParams{}.window)
    report.ssim_value = ssim((truth / peak).eval(), (recon / peak).eval());
  report.acquisition =
      acquisition_time(cfg.plan, matrix.n(), cfg.frame_rate_hz, cfg.overhead_factor);
  lap("metrics");

  const auto out_path = [&](const char* name) {
    return (fs::path(cfg.outdir) / name).string();
  };

  GrayImage display = cfg.intensity != 1.0 ? GrayImage(recon / cfg.intensity) : recon;
  save_image(display, out_path("recon.png"), cfg.out_bit_depth);
  report.artifacts.push_back(out_path("recon.png"));

  if (cfg.use_hpf) {
    const BinaryImage edges = threshold_edges(recon);
    save_image(edges.cast<double>(), out_path("edges.png"), 8);
    report.artifacts.push_back(out_path("edges.png"));
  }
  if (cfg.save_trace_file) {
    save_trace(trace, out_path("trace.spiv"));
    report.artifacts.push_back(out_path("trace.spiv"));
  }
  lap("write");

  std::ofstream out(out_path("report.json"));
  out << report_to_json(report);
  if (!out) throw IoError("run: write report.json failed");
  report.artifacts.push_back(out_path("report.json"));
  return report;
}

std::string report_to_json(const RunReport& report) {
  const PipelineConfig& cfg = report.config;
  json j;
  j["schema"] = "spi-kit-report/1";
  j["matrix"] = {{"degree", cfg.degree}, {"rows", cfg.p}, {"cols", cfg.q}};
  j["scene"] = {{"image", cfg.image_path},
                {"fixture", cfg.image_path.empty() ? cfg.fixture : ""},
                {"intensity", cfg.intensity}};
  j["measurement"] = {{"gain", cfg.model.gain},
                      {"noise_sigma", cfg.model.noise_sigma},
                      {"adc_bits", cfg.model.adc_bits},
                      {"adc_full_scale", cfg.model.adc_full_scale},
                      {"dwell_seconds", cfg.model.dwell_seconds},
                      {"seed", cfg.model.rng_seed}};
  j["sampling"] = {
      {"stride", cfg.plan.stride},
      {"interpolation",
       cfg.plan.interp == SamplingPlan::Interp::linear ? "linear" : "nearest"}};
  if (cfg.use_hpf)
    j["filter"] = {{"cutoff_hz", cfg.filter.cutoff_hz},
                   {"order", cfg.filter.order},
                   {"realization",
                    cfg.filter.realization == FilterSpec::Realization::dft_multiply
                        ? "dft-multiply"
                        : "time-domain"}};
  if (cfg.use_aperture)
    j["aperture"] = {{"detector_um", cfg.aperture.detector_side_um},
                     {"circular", cfg.aperture.circular},
                     {"na_diameter_um", cfg.aperture.na_diameter_um},
                     {"wavelength_um", cfg.aperture.wavelength_um},
                     {"focal_mm", cfg.aperture.focal_mm},
                     {"extent_mm", cfg.aperture.object_extent_mm}};
  if (cfg.crop_w > 0) j["crop"] = {{"width", cfg.crop_w}, {"height", cfg.crop_h}};
  j["acquisition"] = {{"frame_rate_hz", cfg.frame_rate_hz},
                      {"overhead_factor", cfg.overhead_factor},
                      {"pattern_seconds", report.acquisition.pattern_seconds},
                      {"total_seconds", report.acquisition.total_seconds}};
  j["output"] = {{"outdir", cfg.outdir},
                 {"bit_depth", cfg.out_bit_depth},
                 {"save_trace", cfg.save_trace_file}};
  j["metrics"]["psnr_db"] = report.psnr_db;
  if (report.ssim_value)
    j["metrics"]["ssim"] = *report.ssim_value;
  else
    j["metrics"]["ssim"] = nullptr;
  j["timings_ms"] = json::object();
  for (const auto& t : report.timings) j["timings_ms"][t.stage] = t.milliseconds;
  j["artifacts"] = report.artifacts;
  return j.dump(2) + "\n";
}

}  // namespace spi
