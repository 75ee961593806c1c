#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "dtsynth/attributes.hpp"
#include "dtsynth/error.hpp"
#include "dtsynth/image.hpp"
#include "dtsynth/mesh.hpp"

namespace dtsynth {

/// Linear map from an abstract [0,100] attribute to a concrete quantity.
struct LinearMap {
  double min_out = 0.0;
  double max_out = 1.0;

  double operator()(double attr) const { return min_out + (max_out - min_out) * attr / 100.0; }
};

struct RenderConfig {
  int image_width = 64;
  int image_height = 64;
  LinearMap distance_map{2.5, 7.0};   // camera_distance -> horizontal world units
  LinearMap height_map{0.0, 3.0};     // camera_height -> world units
  LinearMap intensity_map{0.0, 1.0};  // light_intensity -> diffuse scale
  double ambient = 0.15;
  Rgb background_color{0.05, 0.05, 0.08};
  double field_of_view = 45.0;  // vertical, degrees

  void validate() const {
    if (image_width <= 0 || image_height <= 0) throw ConfigError("image size must be positive");
    if (distance_map.min_out >= distance_map.max_out) throw ConfigError("distance_map: min >= max");
    if (height_map.min_out >= height_map.max_out) throw ConfigError("height_map: min >= max");
    if (field_of_view <= 0.0 || field_of_view >= 180.0)
      throw ConfigError("field_of_view must be in (0,180)");
  }
};

namespace detail {

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

inline std::uint8_t quantize8(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));  // round half up
}

// Edge function in y-down screen coordinates.
inline double edge_fn(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Top-left fill rule, assuming positive triangle area in y-down coordinates.
inline bool edge_accepts_zero(double dx, double dy) {
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

}  // namespace detail

/// Deterministic rasterization of `mesh` under attribute vector `psi`.
///
/// Scene model: object rotated by azimuth about the world vertical axis; camera
/// at horizontal distance distance_map(camera_distance) and height
/// height_map(camera_height) looking at the origin, then rolled by
/// in_plane_rotation about the viewing axis; pinhole projection; depth-buffered
/// rasterization with pixel-center coverage and a top-left tie rule; Lambertian
/// shading with a directional light at light_azimuth, elevation fixed at 45°.
inline std::pair<RasterImage, SilhouetteMask> render(const Mesh& mesh, const AttributeVector& psi,
                                                     const RenderConfig& cfg) {
  if (mesh.empty()) throw DataError("render: empty mesh");
  cfg.validate();

  const int W = cfg.image_width, H = cfg.image_height;
  const double cam_dist = cfg.distance_map(psi.camera_distance());
  const double cam_height = cfg.height_map(psi.camera_height());
  if (cam_dist == 0.0 && cam_height == 0.0)
    throw DataError("render: degenerate camera at the origin");

  // Object rotation about the vertical (y) axis.
  const double az = detail::deg2rad(psi.azimuth());
  const double ca = std::cos(az), sa = std::sin(az);
  auto rotate_y = [&](const Vec3& p) -> Vec3 {
    return {ca * p.x + sa * p.z, p.y, -sa * p.x + ca * p.z};
  };

  // Camera basis (right-handed, looks along -z in view space).
  const Vec3 eye{0.0, cam_height, cam_dist};
  Vec3 zaxis = eye.normalized();
  Vec3 up{0.0, 1.0, 0.0};
  if (std::abs(zaxis.dot(up)) > 0.999) up = {0.0, 0.0, -1.0};
  Vec3 xaxis = up.cross(zaxis).normalized();
  Vec3 yaxis = zaxis.cross(xaxis);

  // Camera roll about the viewing axis.
  const double roll = detail::deg2rad(psi.in_plane_rotation());
  const double cr = std::cos(roll), sr = std::sin(roll);
  const Vec3 rx = xaxis * cr + yaxis * sr;
  const Vec3 ry = yaxis * cr - xaxis * sr;

  const double fy = 1.0 / std::tan(detail::deg2rad(cfg.field_of_view) / 2.0);
  const double aspect = static_cast<double>(W) / H;

  // Directional light toward the source; elevation fixed at 45 degrees.
  const double laz = detail::deg2rad(psi.light_azimuth());
  const double cel = std::cos(detail::deg2rad(45.0));
  const Vec3 light{cel * std::cos(laz), std::sin(detail::deg2rad(45.0)), cel * std::sin(laz)};
  const double intensity = cfg.intensity_map(psi.light_intensity());

  struct ScreenVert {
    double sx, sy;  // pixel coordinates
    double inv_w;   // 1 / view-space depth
  };

  RasterImage img(W, H);
  SilhouetteMask mask(W, H);
  std::vector<double> depth(static_cast<std::size_t>(W) * H,
                            std::numeric_limits<double>::infinity());
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = detail::quantize8(c == 0   ? cfg.background_color.r
                                            : c == 1 ? cfg.background_color.g
                                                     : cfg.background_color.b);

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    ScreenVert sv[3];
    Vec3 world[3];
    bool clipped = false;
    for (int i = 0; i < 3; ++i) {
      const int vi = mesh.triangles[t][i];
      const Vec3 pw = rotate_y(mesh.vertices[vi]);
      world[i] = pw;
      const Vec3 rel = pw - eye;
      double vx = rx.dot(rel), vy = ry.dot(rel), vz = zaxis.dot(rel);
      const double w = -vz;  // positive in front of the camera
      if (w < 1e-6) { clipped = true; break; }  // no near-plane clipping; skip
      const double ndc_x = (fy / aspect) * vx / w;
      const double ndc_y = fy * vy / w;
      sv[i].sx = (ndc_x * 0.5 + 0.5) * W;
      sv[i].sy = (0.5 - ndc_y * 0.5) * H;
      sv[i].inv_w = 1.0 / w;
    }
    if (clipped) continue;

    // Flat shading with the geometric face normal, flipped toward the camera:
    // shading then commutes exactly with any world rotation that maps the
    // mesh onto itself, which keeps rotationally symmetric objects
    // pixel-stable under symmetric attribute changes.
    Vec3 face_n = (world[1] - world[0]).cross(world[2] - world[0]);
    const double n_len = face_n.norm();
    if (n_len == 0.0) continue;
    face_n = face_n * (1.0 / n_len);
    if (face_n.dot(eye - world[0]) < 0.0) face_n = face_n * -1.0;
    const double diffuse = cfg.ambient + intensity * std::max(0.0, face_n.dot(light));

    double area = detail::edge_fn(sv[0].sx, sv[0].sy, sv[1].sx, sv[1].sy, sv[2].sx, sv[2].sy);
    if (area == 0.0) continue;
    if (area < 0.0) { std::swap(sv[1], sv[2]); area = -area; }

    const int min_px = std::max(0, static_cast<int>(std::floor(std::min({sv[0].sx, sv[1].sx, sv[2].sx}) - 0.5)));
    const int max_px = std::min(W - 1, static_cast<int>(std::ceil(std::max({sv[0].sx, sv[1].sx, sv[2].sx}))));
    const int min_py = std::max(0, static_cast<int>(std::floor(std::min({sv[0].sy, sv[1].sy, sv[2].sy}) - 0.5)));
    const int max_py = std::min(H - 1, static_cast<int>(std::ceil(std::max({sv[0].sy, sv[1].sy, sv[2].sy}))));

    const Rgb alb = mesh.triangle_albedo(t);
    for (int py = min_py; py <= max_py; ++py) {
      for (int px = min_px; px <= max_px; ++px) {
        const double cx = px + 0.5, cy = py + 0.5;
        double w0 = detail::edge_fn(sv[1].sx, sv[1].sy, sv[2].sx, sv[2].sy, cx, cy);
        double w1 = detail::edge_fn(sv[2].sx, sv[2].sy, sv[0].sx, sv[0].sy, cx, cy);
        double w2 = detail::edge_fn(sv[0].sx, sv[0].sy, sv[1].sx, sv[1].sy, cx, cy);
        auto covered = [&](double w, int a, int b) {
          if (w > 0.0) return true;
          if (w < 0.0) return false;
          return detail::edge_accepts_zero(sv[b].sx - sv[a].sx, sv[b].sy - sv[a].sy);
        };
        if (!covered(w0, 1, 2) || !covered(w1, 2, 0) || !covered(w2, 0, 1)) continue;

        const double b0 = w0 / area, b1 = w1 / area, b2 = w2 / area;
        const double inv_w = b0 * sv[0].inv_w + b1 * sv[1].inv_w + b2 * sv[2].inv_w;
        const double z = 1.0 / inv_w;
        const std::size_t idx = static_cast<std::size_t>(py) * W + px;
        if (z >= depth[idx]) continue;
        depth[idx] = z;

        img.at(px, py, 0) = detail::quantize8(alb.r * diffuse);
        img.at(px, py, 1) = detail::quantize8(alb.g * diffuse);
        img.at(px, py, 2) = detail::quantize8(alb.b * diffuse);
        mask.set(px, py, true);
      }
    }
  }
  return {std::move(img), std::move(mask)};
}

}  // namespace dtsynth
