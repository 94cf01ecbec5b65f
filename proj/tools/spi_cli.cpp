// Command-line front end: simulate and invert the single-pixel measurement
// chain, plus the supporting analyses (edges, aperture, color fusion,
// metrics, effective bits, fixtures).

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spi/color.hpp"
#include "spi/fixtures.hpp"
#include "spi/io.hpp"
#include "spi/pipeline.hpp"
#include "spi/recon.hpp"

namespace {

using nlohmann::json;
using namespace spi;

// Exit codes: 0 ok, 2 config, 3 I/O, 4 numerical.
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

std::pair<Eigen::Index, Eigen::Index> parse_wxh(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos)
    throw ConfigInvalid("expected WxH, got " + s);
  try {
    return {std::stoll(s.substr(0, x)), std::stoll(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw ConfigInvalid("expected WxH, got " + s);
  }
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("cannot write " + path);
}

// "wavelength,power" rows resampled is not supported: the file must cover the
// CMF grid point-for-point.
Eigen::VectorXd load_spectrum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  const CmfTable& cmf = cie_1931_cmf();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(cmf.size());
  Eigen::Index filled = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string nm_str, val_str;
    if (!std::getline(ss, nm_str, ',') || !std::getline(ss, val_str))
      throw CorruptFile(path + ": expected wavelength,power per line");
    const double nm = std::stod(nm_str);
    const Eigen::Index i = Eigen::Index(std::lround((nm - 380.0) / 5.0));
    if (i < 0 || i >= cmf.size() || cmf.wavelength_nm[i] != nm)
      throw GridMismatch(path + ": wavelength " + nm_str +
                         " not on the 380..780 nm / 5 nm grid");
    s[i] = std::stod(val_str);
    ++filled;
  }
  if (filled != cmf.size())
    throw GridMismatch(path + ": " + std::to_string(filled) + " of " +
                       std::to_string(cmf.size()) + " grid points given");
  double integral = 0.0;
  for (Eigen::Index i = 0; i + 1 < s.size(); ++i)
    integral += 0.5 * (s[i] + s[i + 1]) * 5.0;
  if (integral <= 0) throw GridMismatch(path + ": spectrum carries no power");
  return s / integral;
}

std::vector<UsafElement> load_usaf_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw CorruptFile(path + ": " + e.what());
  }
  std::vector<UsafElement> elements;
  for (const auto& je : j.at("elements")) {
    UsafElement e;
    e.group = je.at("group").get<int>();
    e.element = je.at("element").get<int>();
    e.lp_per_mm = je.at("lp_per_mm").get<double>();
    for (const char* key : {"horizontal", "vertical"}) {
      BarBlock& b = std::string(key) == "horizontal" ? e.horizontal : e.vertical;
      const auto& jb = je.at(key);
      b.axis = jb.at("axis").get<int>();
      for (size_t i = 0; i < 3; ++i) b.bar_centers[i] = jb.at("bar_centers")[i];
      for (size_t i = 0; i < 2; ++i) b.gap_centers[i] = jb.at("gap_centers")[i];
      b.span_lo = jb.at("span")[0];
      b.span_hi = jb.at("span")[1];
    }
    elements.push_back(e);
  }
  return elements;
}

int dispatch(CLI::App& app) {
  // --- gen-matrix ---
  auto* gen = app.add_subcommand("gen-matrix", "generate a cyclic sampling matrix");
  int gen_degree = 8;
  long long gen_rows = 0, gen_cols = 0;
  std::string gen_out;
  gen->add_option("--degree", gen_degree, "register length (2..20)")->required();
  gen->add_option("--rows", gen_rows, "pattern rows p")->required();
  gen->add_option("--cols", gen_cols, "pattern cols q")->required();
  gen->add_option("--out", gen_out, "output matrix file")->required();
  gen->callback([&] {
    const CyclicSMatrix m = CyclicSMatrix::from_degree(gen_degree, gen_rows, gen_cols);
    save_matrix(m, gen_out);
    std::cout << "wrote " << gen_out << " (N=" << m.n() << ", " << m.pattern_rows()
              << "x" << m.pattern_cols() << ")\n";
  });

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "measure an image into a voltage trace");
  std::string sim_matrix, sim_image, sim_out;
  MeasurementModel sim_model;
  long long sim_stride = 1;
  double sim_intensity = 1.0;
  sim->add_option("--matrix", sim_matrix)->required();
  sim->add_option("--image", sim_image)->required();
  sim->add_option("--out", sim_out)->required();
  sim->add_option("--gain", sim_model.gain, "volts per unit bucket sum");
  sim->add_option("--noise-sigma", sim_model.noise_sigma, "noise sigma, volts");
  sim->add_option("--adc-bits", sim_model.adc_bits, "0 disables quantization");
  sim->add_option("--full-scale", sim_model.adc_full_scale, "ADC range; <=0 auto");
  sim->add_option("--dwell", sim_model.dwell_seconds, "seconds per pattern");
  sim->add_option("--seed", sim_model.rng_seed);
  sim->add_option("--stride", sim_stride, "measure every k-th pattern");
  sim->add_option("--intensity", sim_intensity, "scene multiplier");
  sim->callback([&] {
    const CyclicSMatrix m = load_matrix(sim_matrix);
    GrayImage img = load_image(sim_image);
    if (img.rows() > m.pattern_rows() || img.cols() > m.pattern_cols())
      throw ConfigInvalid("image exceeds the pattern field");
    img = embed(img, m.pattern_rows(), m.pattern_cols());
    if (sim_intensity != 1.0) img *= sim_intensity;
    SamplingPlan plan;
    plan.stride = sim_stride;
    const VoltageTrace t = measure_planned(m, img, sim_model, plan);
    save_trace(t, sim_out);
    std::cout << "wrote " << sim_out << " (" << t.measured_count() << "/" << t.length()
              << " samples)\n";
  });

  // --- reconstruct ---
  auto* rec = app.add_subcommand("reconstruct", "invert a voltage trace to an image");
  std::string rec_trace, rec_matrix, rec_out, rec_crop, rec_interp = "linear";
  std::string rec_psnr_vs, rec_report;
  double rec_gain = 1.0;
  int rec_depth = 8;
  rec->add_option("--trace", rec_trace)->required();
  rec->add_option("--matrix", rec_matrix)->required();
  rec->add_option("--out", rec_out)->required();
  rec->add_option("--crop", rec_crop, "WxH active window");
  rec->add_option("--gain", rec_gain, "gain used when the trace was simulated");
  rec->add_option("--interp", rec_interp, "linear|nearest for missing samples");
  rec->add_option("--psnr-vs", rec_psnr_vs, "reference image for PSNR");
  rec->add_option("--report", rec_report, "JSON sidecar path");
  rec->add_option("--bit-depth", rec_depth);
  rec->callback([&] {
    const CyclicSMatrix m = load_matrix(rec_matrix);
    VoltageTrace t = load_trace(rec_trace);
    const Eigen::Index stride = trace_stride(t);
    const auto t0 = std::chrono::steady_clock::now();
    t = interpolate_trace(t, rec_interp == "nearest" ? SamplingPlan::Interp::nearest
                                                     : SamplingPlan::Interp::linear);
    GrayImage img = reconstruct(m, t, rec_gain);
    if (!rec_crop.empty()) {
      const auto [w, h] = parse_wxh(rec_crop);
      img = crop_active(img, w, h);
    }
    const double runtime_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
    save_image(img, rec_out, rec_depth);
    std::cout << "wrote " << rec_out << " in " << runtime_ms << " ms\n";
    json j{{"schema", "spi-kit-report/1"},
           {"n", m.n()},
           {"stride", stride},
           {"runtime_ms", runtime_ms}};
    if (!rec_psnr_vs.empty()) {
      const GrayImage ref = load_image(rec_psnr_vs);
      j["psnr_vs"] = psnr(ref, img);
    }
    if (!rec_report.empty()) write_json(rec_report, j);
  });

  // --- edges ---
  auto* edg = app.add_subcommand("edges", "high-pass the trace and threshold edges");
  std::string edg_trace, edg_matrix, edg_out, edg_gradient, edg_realization =
                                                                "dft-multiply";
  FilterSpec edg_spec;
  double edg_gain = 1.0, edg_fraction = 0.7;
  edg->add_option("--trace", edg_trace)->required();
  edg->add_option("--matrix", edg_matrix)->required();
  edg->add_option("--cutoff-hz", edg_spec.cutoff_hz)->required();
  edg->add_option("--order", edg_spec.order);
  edg->add_option("--realization", edg_realization, "dft-multiply|time-domain");
  edg->add_option("--out", edg_out)->required();
  edg->add_option("--emit-gradient", edg_gradient, "write pre-threshold magnitude");
  edg->add_option("--gain", edg_gain);
  edg->add_option("--otsu-fraction", edg_fraction);
  edg->callback([&] {
    const CyclicSMatrix m = load_matrix(edg_matrix);
    VoltageTrace t = load_trace(edg_trace);
    t = interpolate_trace(t);
    edg_spec.realization = edg_realization == "time-domain"
                               ? FilterSpec::Realization::time_domain
                               : FilterSpec::Realization::dft_multiply;
    t = hpf_trace(t, edg_spec);
    const GrayImage grad = reconstruct(m, t, edg_gain);
    if (!edg_gradient.empty()) {
      const double peak = grad.cwiseAbs().maxCoeff();
      save_image(peak > 0 ? GrayImage(grad.cwiseAbs() / peak) : grad, edg_gradient, 8);
    }
    save_image(threshold_edges(grad, edg_fraction).cast<double>(), edg_out, 8);
    std::cout << "wrote " << edg_out << "\n";
  });

  // --- aperture ---
  auto* ape = app.add_subcommand("aperture", "filter an image by the detector aperture");
  std::string ape_image, ape_out, ape_report, ape_meta;
  ApertureModel ape_model;
  double ape_contrast = 0.1;
  ape->add_option("--image", ape_image)->required();
  ape->add_option("--detector-um", ape_model.detector_side_um);
  ape->add_flag("--circular", ape_model.circular);
  ape->add_option("--na-um", ape_model.na_diameter_um, "outer NA circle diameter");
  ape->add_option("--wavelength-um", ape_model.wavelength_um);
  ape->add_option("--focal-mm", ape_model.focal_mm);
  ape->add_option("--extent-mm", ape_model.object_extent_mm);
  ape->add_option("--out", ape_out)->required();
  ape->add_option("--report", ape_report);
  ape->add_option("--usaf-meta", ape_meta, "fixture metadata to score resolvability");
  ape->add_option("--min-contrast", ape_contrast);
  ape->callback([&] {
    const GrayImage img = load_image(ape_image);
    save_image(aperture_filter(img, ape_model), ape_out, 8);
    std::cout << "wrote " << ape_out << "\n";
    if (!ape_report.empty()) {
      const FourierScale scale = fourier_scale(ape_model, img.rows(), img.cols());
      json j{{"schema", "spi-kit-report/1"},
             {"fourier_extent_um", scale.extent_um},
             {"step_x_um", scale.step_x_um},
             {"step_y_um", scale.step_y_um},
             {"cutoff_lp_per_mm", cutoff_lp_per_mm(ape_model)}};
      if (!ape_meta.empty()) {
        const auto report =
            resolvable_frequency(ape_model, img, load_usaf_meta(ape_meta), ape_contrast);
        j["resolvable_lp_per_mm"] = report.max_lp_per_mm;
        j["resolvable_group"] = report.group;
        j["resolvable_element"] = report.element;
        j["elements"] = json::array();
        for (const auto& e : report.elements)
          j["elements"].push_back({{"group", e.group},
                                   {"element", e.element},
                                   {"lp_per_mm", e.lp_per_mm},
                                   {"contrast_h", e.contrast_h},
                                   {"contrast_v", e.contrast_v},
                                   {"resolvable", e.resolvable}});
      }
      write_json(ape_report, j);
    }
  });

  // --- fuse ---
  auto* fus = app.add_subcommand("fuse", "fuse three channel images into RGB");
  std::string fus_r, fus_g, fus_b, fus_out, fus_csv;
  std::string fus_wavelengths = "780,565,450", fus_gains = "1,1,1";
  double fus_gamma = 2.2, fus_fwhm = 25.0;
  fus->add_option("--r", fus_r)->required();
  fus->add_option("--g", fus_g)->required();
  fus->add_option("--b", fus_b)->required();
  fus->add_option("--wavelengths", fus_wavelengths, "nm, long to short");
  fus->add_option("--gamma", fus_gamma);
  fus->add_option("--fwhm", fus_fwhm, "Gaussian line width, nm");
  fus->add_option("--gains", fus_gains, "per-channel display gains");
  fus->add_option("--spectrum-csv", fus_csv, "up to three CSV paths, r,g,b order");
  fus->add_option("--out", fus_out)->required();
  fus->callback([&] {
    const auto nm = parse_doubles(fus_wavelengths);
    const auto gains = parse_doubles(fus_gains);
    if (nm.size() != 3 || gains.size() != 3)
      throw ConfigInvalid("need exactly three wavelengths and three gains");
    std::array<SpectralChannel, 3> channels{
        make_channel(nm[0], load_image(fus_r), fus_fwhm, gains[0]),
        make_channel(nm[1], load_image(fus_g), fus_fwhm, gains[1]),
        make_channel(nm[2], load_image(fus_b), fus_fwhm, gains[2])};
    if (!fus_csv.empty()) {
      const auto paths = split(fus_csv, ',');
      for (size_t i = 0; i < paths.size() && i < 3; ++i)
        if (!paths[i].empty()) channels[i].spectrum = load_spectrum_csv(paths[i]);
    }
    save_rgb_png(fuse_rgb(channels, cie_1931_cmf(), fus_gamma), fus_out, 8);
    std::cout << "wrote " << fus_out << "\n";
  });

  // --- metrics ---
  auto* met = app.add_subcommand("metrics", "PSNR/SSIM between two images");
  std::string met_a, met_b, met_report;
  met->add_option("--a", met_a)->required();
  met->add_option("--b", met_b)->required();
  met->add_option("--report", met_report);
  met->callback([&] {
    const GrayImage a = load_image(met_a), b = load_image(met_b);
    QualityReport q;
    q.psnr_db = psnr(a, b);
    json j{{"schema", "spi-kit-report/1"}, {"psnr_db", q.psnr_db}};
    if (std::min(a.rows(), a.cols()) >= SsimParams{}.window) {
      q.ssim = ssim(a, b);
      j["ssim"] = q.ssim;
      std::cout << "psnr_db " << q.psnr_db << "  ssim " << q.ssim << "\n";
    } else {
      j["ssim"] = nullptr;
      std::cout << "psnr_db " << q.psnr_db << "  ssim n/a (image below window)\n";
    }
    if (!met_report.empty()) write_json(met_report, j);
  });

  // --- bits ---
  auto* bit = app.add_subcommand("bits", "effective ADC bits an image demands");
  std::string bit_matrix, bit_image, bit_report;
  double bit_quantum = 1.0 / 255.0;
  bit->add_option("--matrix", bit_matrix)->required();
  bit->add_option("--image", bit_image)->required();
  bit->add_option("--quantum", bit_quantum, "uniqueness grid for bucket sums");
  bit->add_option("--report", bit_report);
  bit->callback([&] {
    const CyclicSMatrix m = load_matrix(bit_matrix);
    GrayImage img = load_image(bit_image);
    if (img.rows() > m.pattern_rows() || img.cols() > m.pattern_cols())
      throw ConfigInvalid("image exceeds the pattern field");
    img = embed(img, m.pattern_rows(), m.pattern_cols());
    const EffectiveBits eb = effective_bits(m, img, bit_quantum);
    std::cout << "unique_levels " << eb.n_unique << "  effective_bits " << eb.bits
              << "\n";
    if (!bit_report.empty())
      write_json(bit_report, json{{"schema", "spi-kit-report/1"},
                                  {"unique_levels", eb.n_unique},
                                  {"effective_bits", eb.bits}});
  });

  // --- fixtures ---
  auto* fix = app.add_subcommand("fixtures", "render the bundled test targets");
  std::string fix_outdir = "fixtures";
  fix->add_option("--outdir", fix_outdir);
  fix->callback([&] {
    for (const auto& f : make_fixtures(fix_outdir)) std::cout << "wrote " << f << "\n";
  });

  // --- run ---
  auto* run = app.add_subcommand("run", "full pipeline from a config file");
  std::string run_config, run_outdir, run_image;
  long long run_stride = -1;
  double run_noise = -1.0, run_intensity = -1.0, run_cutoff = -1.0;
  long long run_seed = -1;
  run->add_option("--config", run_config)->required();
  run->add_option("--outdir", run_outdir, "override outdir");
  run->add_option("--image", run_image, "override scene image");
  run->add_option("--stride", run_stride, "override sampling stride");
  run->add_option("--noise-sigma", run_noise, "override noise sigma");
  run->add_option("--intensity", run_intensity, "override intensity");
  run->add_option("--cutoff-hz", run_cutoff, "override filter cutoff");
  run->add_option("--seed", run_seed, "override rng seed");
  run->callback([&] {
    PipelineConfig cfg = load_config(run_config);
    if (!run_outdir.empty()) cfg.outdir = run_outdir;
    if (!run_image.empty()) cfg.image_path = run_image;
    if (run_stride > 0) cfg.plan.stride = run_stride;
    if (run_noise >= 0) cfg.model.noise_sigma = run_noise;
    if (run_intensity > 0) cfg.intensity = run_intensity;
    if (run_cutoff > 0) {
      cfg.use_hpf = true;
      cfg.filter.cutoff_hz = run_cutoff;
    }
    if (run_seed >= 0) cfg.model.rng_seed = std::uint64_t(run_seed);
    const RunReport report = run_pipeline(cfg);
    std::cout << "psnr_db " << report.psnr_db;
    if (report.ssim_value) std::cout << "  ssim " << *report.ssim_value;
    std::cout << "\nreport " << cfg.outdir << "/report.json\n";
  });

  app.require_subcommand(1);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-pixel imaging simulation toolkit"};
  dispatch(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const CorruptFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const UnsupportedFormat& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const KernelZero& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NonFiniteInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
