#pragma once

#include <optional>
#include <string>

#include "spi/forward.hpp"
#include "spi/hpf.hpp"
#include "spi/metrics.hpp"
#include "spi/optics.hpp"

namespace spi {

// Everything one end-to-end run needs. Loaded from a JSON config file; CLI
// flags override individual fields afterwards.
struct PipelineConfig {
  int degree = 8;
  Eigen::Index p = 15, q = 17;

  std::string image_path;        // empty: render the named fixture instead
  std::string fixture = "usaf";  // usaf | silhouette
  double intensity = 1.0;        // light level, scales the scene before measuring

  MeasurementModel model;
  SamplingPlan plan;

  bool use_hpf = false;
  FilterSpec filter;

  bool use_aperture = false;
  ApertureModel aperture;

  Eigen::Index crop_w = 0, crop_h = 0;  // 0 = keep the full p x q field

  double frame_rate_hz = 22727.0;
  double overhead_factor = 1.0;

  std::string outdir = ".";
  int out_bit_depth = 8;
  bool save_trace_file = false;
};

PipelineConfig load_config(const std::string& path);
void validate(const PipelineConfig& cfg);

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct RunReport {
  PipelineConfig config;
  std::vector<StageTiming> timings;
  double psnr_db = 0.0;
  std::optional<double> ssim_value;  // absent when the crop is below the window
  AcquisitionTime acquisition;
  std::vector<std::string> artifacts;
};

// generate -> (aperture) -> measure -> interpolate -> (hpf) -> reconstruct ->
// crop -> metrics; writes recon.png (and edges.png under hpf, trace.spiv on
// request) plus report.json into cfg.outdir.
RunReport run_pipeline(const PipelineConfig& cfg);

// Serialized form of the report (schema spi-kit-report/1). Exposed so tools
// and tests share one writer.
std::string report_to_json(const RunReport& report);

}  // namespace spi
