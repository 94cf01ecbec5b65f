#include "spi/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "spi/io.hpp"

namespace spi {

namespace {

// Exact coverage of an axis-aligned dark rectangle (mm coords): every pixel
// loses the overlapped fraction of its area. No supersampling needed.
void darken_rect(GrayImage& img, double px_per_mm, double x0, double x1, double y0,
                 double y1) {
  const auto first_col = Eigen::Index(std::floor(x0 * px_per_mm));
  const auto last_col = Eigen::Index(std::ceil(x1 * px_per_mm));
  const auto first_row = Eigen::Index(std::floor(y0 * px_per_mm));
  const auto last_row = Eigen::Index(std::ceil(y1 * px_per_mm));
  for (Eigen::Index r = std::max<Eigen::Index>(first_row, 0);
       r < std::min(last_row, img.rows()); ++r) {
    const double ry0 = r / px_per_mm, ry1 = (r + 1) / px_per_mm;
    const double oy = std::max(0.0, std::min(y1, ry1) - std::max(y0, ry0));
    if (oy <= 0) continue;
    for (Eigen::Index c = std::max<Eigen::Index>(first_col, 0);
         c < std::min(last_col, img.cols()); ++c) {
      const double cx0 = c / px_per_mm, cx1 = (c + 1) / px_per_mm;
      const double ox = std::max(0.0, std::min(x1, cx1) - std::max(x0, cx0));
      if (ox <= 0) continue;
      img(r, c) = std::max(0.0, img(r, c) - ox * oy * px_per_mm * px_per_mm);
    }
  }
}

double element_lp_per_mm(int group, int element) {
  return std::pow(2.0, double(group) + double(element - 1) / 6.0);
}

}  // namespace

UsafTarget render_usaf(Eigen::Index cols, Eigen::Index rows, double extent_mm,
                       int group_min, int group_max, bool reference_square) {
  if (cols < 1 || rows < 1 || !(extent_mm > 0) || group_min > group_max)
    throw ConfigInvalid("render_usaf: bad geometry");

  UsafTarget target;
  target.extent_mm = extent_mm;
  target.image = GrayImage::Constant(rows, cols, 1.0);
  const double px_per_mm = double(cols) / extent_mm;
  const double height_mm = double(rows) / px_per_mm;

  const double margin = 0.15;
  double x_cursor = margin;

  for (int g = group_min; g <= group_max; ++g) {
    const double w1 = 1.0 / (2.0 * element_lp_per_mm(g, 1));  // widest bar this group
    double y_cursor = margin;
    for (int e = 1; e <= 6; ++e) {
      const double lp = element_lp_per_mm(g, e);
      const double w = 1.0 / (2.0 * lp);  // bar width = half a line pair
      const double len = 5.0 * w;
      if (y_cursor + len > height_mm - margin) break;  // group column overflows

      UsafElement el;
      el.group = g;
      el.element = e;
      el.lp_per_mm = lp;

      // Horizontal-bar block: three bars stacked along y.
      const double hx = x_cursor, hy = y_cursor;
      for (int b = 0; b < 3; ++b)
        darken_rect(target.image, px_per_mm, hx, hx + len, hy + 2 * b * w,
                    hy + (2 * b + 1) * w);
      el.horizontal.axis = 1;
      for (int b = 0; b < 3; ++b)
        el.horizontal.bar_centers[size_t(b)] = (hy + (2 * b + 0.5) * w) * px_per_mm;
      for (int gpp = 0; gpp < 2; ++gpp)
        el.horizontal.gap_centers[size_t(gpp)] = (hy + (2 * gpp + 1.5) * w) * px_per_mm;
      el.horizontal.span_lo = hx * px_per_mm;
      el.horizontal.span_hi = (hx + len) * px_per_mm;

      // Vertical-bar block to its right: three bars marching along x.
      const double vx = x_cursor + len + w, vy = y_cursor;
      for (int b = 0; b < 3; ++b)
        darken_rect(target.image, px_per_mm, vx + 2 * b * w, vx + (2 * b + 1) * w, vy,
                    vy + len);
      el.vertical.axis = 0;
      for (int b = 0; b < 3; ++b)
        el.vertical.bar_centers[size_t(b)] = (vx + (2 * b + 0.5) * w) * px_per_mm;
      for (int gpp = 0; gpp < 2; ++gpp)
        el.vertical.gap_centers[size_t(gpp)] = (vx + (2 * gpp + 1.5) * w) * px_per_mm;
      el.vertical.span_lo = vy * px_per_mm;
      el.vertical.span_hi = (vy + len) * px_per_mm;

      target.elements.push_back(el);
      y_cursor += len + 2.0 * w;
    }
    x_cursor += 11.0 * w1 + 0.3;
    if (x_cursor > extent_mm - margin) break;
  }

  if (reference_square) {
    const double side = std::min(1.0, 0.22 * std::min(extent_mm, height_mm));
    darken_rect(target.image, px_per_mm, extent_mm - margin - side, extent_mm - margin,
                height_mm - margin - side, height_mm - margin);
  }
  return target;
}

namespace {

struct Pt {
  double x, y;
};

double seg_dist2(Pt p, Pt a, Pt b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
  return dx * dx + dy * dy;
}

bool in_capsule(Pt p, Pt a, Pt b, double r) { return seg_dist2(p, a, b) <= r * r; }

bool in_ellipse(Pt p, Pt c, double rx, double ry) {
  const double dx = (p.x - c.x) / rx, dy = (p.y - c.y) / ry;
  return dx * dx + dy * dy <= 1.0;
}

// Body plan in unit coordinates, x rightward, y downward.
bool in_silhouette(Pt p) {
  return in_ellipse(p, {0.46, 0.58}, 0.21, 0.145)             // body
         || in_ellipse(p, {0.715, 0.315}, 0.075, 0.085)       // head
         || in_capsule(p, {0.60, 0.50}, {0.705, 0.345}, 0.06) // neck
         || in_capsule(p, {0.745, 0.25}, {0.78, 0.16}, 0.022) // ear
         || in_capsule(p, {0.695, 0.24}, {0.70, 0.15}, 0.022) // ear
         || in_capsule(p, {0.30, 0.64}, {0.10, 0.80}, 0.05)   // tail
         || in_capsule(p, {0.38, 0.66}, {0.36, 0.88}, 0.045)  // hind leg
         || in_capsule(p, {0.54, 0.66}, {0.56, 0.88}, 0.040)  // fore leg
         || in_capsule(p, {0.36, 0.88}, {0.46, 0.89}, 0.025)  // hind foot
         || in_capsule(p, {0.56, 0.88}, {0.64, 0.89}, 0.022); // fore foot
}

}  // namespace

Silhouette render_silhouette(Eigen::Index cols, Eigen::Index rows) {
  if (cols < 1 || rows < 1) throw ConfigInvalid("render_silhouette: empty grid");
  Silhouette s;
  s.image.resize(rows, cols);
  // 3x3 coverage vote per pixel, then hard threshold: output stays binary.
  const double scale = double(std::max(rows, cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      int hits = 0;
      for (int sr = 0; sr < 3; ++sr)
        for (int sc = 0; sc < 3; ++sc) {
          const Pt p{(double(c) + (sc + 0.5) / 3.0) / scale,
                     (double(r) + (sr + 0.5) / 3.0) / scale};
          hits += in_silhouette(p) ? 1 : 0;
        }
      s.image(r, c) = hits >= 5 ? 1.0 : 0.0;
    }
  }
  s.area_fraction = s.image.mean();
  return s;
}

std::vector<std::string> make_fixtures(const std::string& outdir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("make_fixtures: cannot create " + outdir);

  std::vector<std::string> written;
  const auto emit = [&](const std::string& name) {
    written.push_back((fs::path(outdir) / name).string());
    return written.back();
  };

  const UsafTarget usaf = render_usaf(768, 768);
  save_image(usaf.image, emit("usaf.png"), 8);
  {
    nlohmann::json j;
    j["extent_mm"] = usaf.extent_mm;
    j["elements"] = nlohmann::json::array();
    for (const auto& e : usaf.elements) {
      nlohmann::json je;
      je["group"] = e.group;
      je["element"] = e.element;
      je["lp_per_mm"] = e.lp_per_mm;
      for (const char* key : {"horizontal", "vertical"}) {
        const BarBlock& b = std::string(key) == "horizontal" ? e.horizontal : e.vertical;
        je[key] = {{"axis", b.axis},
                   {"bar_centers", b.bar_centers},
                   {"gap_centers", b.gap_centers},
                   {"span", {b.span_lo, b.span_hi}}};
      }
      j["elements"].push_back(je);
    }
    std::ofstream out(emit("usaf.json"));
    out << j.dump(2) << "\n";
    if (!out) throw IoError("make_fixtures: write usaf.json failed");
  }

  const Silhouette sil = render_silhouette(768, 768);
  save_image(sil.image, emit("silhouette.png"), 8);
  {
    nlohmann::json j;
    j["area_fraction"] = sil.area_fraction;
    j["size"] = {768, 768};
    std::ofstream out(emit("silhouette.json"));
    out << j.dump(2) << "\n";
    if (!out) throw IoError("make_fixtures: write silhouette.json failed");
  }
  return written;
}

}  // namespace spi
