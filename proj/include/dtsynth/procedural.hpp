#pragma once

// Built-in procedural assets. The pipeline resolves mesh paths of the form
// "builtin:<name>" to these, so the shipped scenarios need no mesh files.

#include <cmath>
#include <numbers>
#include <string>

#include "dtsynth/error.hpp"
#include "dtsynth/mesh.hpp"

namespace dtsynth {

/// Axis-aligned box; one albedo per face when `face_colors` is given.
inline Mesh make_box(double sx, double sy, double sz,
                     const std::array<Rgb, 6>* face_colors = nullptr) {
  Mesh m;
  const double x = sx / 2, y = sy / 2, z = sz / 2;
  m.vertices = {{-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
                {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z}};
  // faces: -z, +z, -y, +y, -x, +x
  const int quads[6][4] = {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4},
                           {3, 7, 6, 2}, {0, 4, 7, 3}, {1, 2, 6, 5}};
  for (int f = 0; f < 6; ++f) {
    const int* q = quads[f];
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
    if (face_colors) {
      m.face_albedo.push_back((*face_colors)[f]);
      m.face_albedo.push_back((*face_colors)[f]);
    }
  }
  m.recenter();
  m.compute_normals();
  return m;
}

/// Closed cylinder about the vertical axis.
inline Mesh make_cylinder(double radius, double height, int segments, Rgb albedo) {
  Mesh m;
  m.albedo = albedo;
  const double h = height / 2;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    const double cx = radius * std::cos(a), cz = radius * std::sin(a);
    m.vertices.push_back({cx, -h, cz});
    m.vertices.push_back({cx, h, cz});
  }
  const int bottom_center = static_cast<int>(m.vertices.size());
  m.vertices.push_back({0, -h, 0});
  const int top_center = bottom_center + 1;
  m.vertices.push_back({0, h, 0});
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    m.triangles.push_back({b0, t0, b1});
    m.triangles.push_back({b1, t0, t1});
    m.triangles.push_back({bottom_center, b0, b1});
    m.triangles.push_back({top_center, t1, t0});
  }
  m.recenter();
  m.compute_normals();
  return m;
}

/// Ellipsoid from a lat/long sphere tessellation; flatten via the radii.
inline Mesh make_ellipsoid(double rx, double ry, double rz, int stacks, int slices, Rgb albedo) {
  Mesh m;
  m.albedo = albedo;
  for (int i = 0; i <= stacks; ++i) {
    const double phi = std::numbers::pi * i / stacks;  // 0 at +y pole
    for (int j = 0; j < slices; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / slices;
      m.vertices.push_back({rx * std::sin(phi) * std::cos(theta), ry * std::cos(phi),
                            rz * std::sin(phi) * std::sin(theta)});
    }
  }
  auto id = [&](int i, int j) { return i * slices + (j % slices); };
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      const int a = id(i, j), b = id(i, j + 1), c = id(i + 1, j), d = id(i + 1, j + 1);
      if (i > 0) m.triangles.push_back({a, b, c});
      if (i < stacks - 1) m.triangles.push_back({b, d, c});
    }
  }
  m.recenter();
  m.compute_normals();
  return m;
}

inline Mesh make_tetrahedron() {
  Mesh m;
  m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  m.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  m.recenter();
  m.compute_normals();
  return m;
}

/// Cube with a distinct albedo per face; no two viewpoints render alike.
inline Mesh make_asymmetric_box() {
  const std::array<Rgb, 6> colors = {Rgb{0.9, 0.2, 0.2}, Rgb{0.2, 0.9, 0.2},
                                     Rgb{0.2, 0.2, 0.9}, Rgb{0.9, 0.9, 0.2},
                                     Rgb{0.2, 0.9, 0.9}, Rgb{0.9, 0.4, 0.7}};
  return make_box(1.6, 1.0, 0.7, &colors);
}

/// Asymmetric faceted blob: an uneven ellipsoid whose faces are colored by
/// azimuthal sector and latitude band. Dozens of distinct face normals make
/// the light direction observable under flat shading, and the sector colors
/// break every rotational symmetry — the go-to asset for identifiability
/// studies (every attribute changes the image).
inline Mesh make_faceted() {
  // A color-coded sphere built for attribute identifiability: the spherical
  // geometry makes silhouette, shading, and the vertical brightness gradient
  // invariant to azimuth, so camera roll, distance, height, and the light are
  // each pinned down by their own image cue; azimuth itself is a pure texture
  // phase over 12 distinct hue columns (one per 30-degree grid step). The
  // distinct hues plus the monotone top-to-bottom shade remove every
  // rotational symmetry.
  Mesh m = make_ellipsoid(1.0, 1.0, 1.0, 12, 24, Rgb{0.8, 0.8, 0.8});
  const Rgb wheel[12] = {{0.95, 0.15, 0.15}, {0.95, 0.55, 0.1}, {0.9, 0.9, 0.1},
                         {0.5, 0.9, 0.1},   {0.1, 0.85, 0.2},  {0.1, 0.9, 0.65},
                         {0.1, 0.85, 0.9},  {0.15, 0.5, 0.95}, {0.15, 0.15, 0.95},
                         {0.55, 0.15, 0.9}, {0.9, 0.15, 0.85}, {0.9, 0.2, 0.45}};
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    Vec3 c{};
    for (int i : m.triangles[t]) c = c + m.vertices[i];
    c = c * (1.0 / 3.0);
    const double angle = std::atan2(c.z, c.x);  // (-pi, pi]
    const int sector =
        std::clamp(static_cast<int>((angle + std::numbers::pi) / (2.0 * std::numbers::pi) * 12.0),
                   0, 11);
    const double r2 = std::sqrt(c.x * c.x + c.z * c.z) + 1e-12;
    const double lat = std::atan2(c.y, r2);  // -pi/2 .. pi/2
    const double shade = 0.35 + 0.65 * (lat + std::numbers::pi / 2) / std::numbers::pi;
    const Rgb color = wheel[sector];
    m.face_albedo.push_back({color.r * shade, color.g * shade, color.b * shade});
  }
  return m;
}

inline bool is_builtin_mesh(const std::string& path) { return path.starts_with("builtin:"); }

inline Mesh make_builtin_mesh(const std::string& name) {
  if (name == "box") return make_asymmetric_box();
  if (name == "plain-box") return make_box(1.0, 1.0, 1.0);
  if (name == "bottle") return make_cylinder(0.45, 1.8, 24, Rgb{0.25, 0.55, 0.85});
  if (name == "bag") {
    Mesh m = make_ellipsoid(1.0, 0.8, 0.35, 12, 24, Rgb{0.85, 0.65, 0.2});
    // two-tone front/back so azimuth is observable on the flat faces
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      Vec3 c{};
      for (int i : m.triangles[t]) c = c + m.vertices[i];
      m.face_albedo.push_back(c.z >= 0 ? Rgb{0.85, 0.65, 0.2} : Rgb{0.45, 0.25, 0.55});
    }
    return m;
  }
  if (name == "tetra") return make_tetrahedron();
  if (name == "faceted") return make_faceted();
  throw DataError("unknown builtin mesh: " + name);
}

/// Accepts either "builtin:<name>" or a filesystem path.
inline Mesh resolve_mesh(const std::string& path) {
  if (is_builtin_mesh(path)) return make_builtin_mesh(path.substr(8));
  return load_mesh(path);
}

}  // namespace dtsynth
