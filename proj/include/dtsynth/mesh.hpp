#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dtsynth/error.hpp"

namespace dtsynth {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{};
  }
};

struct Rgb {
  double r = 0.8, g = 0.8, b = 0.8;  // albedo in [0,1]
};

/// Triangle mesh, recentered so its bounding-box center sits at the origin.
/// Albedo is per mesh unless face_albedo is populated (one entry per triangle).
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;                  // unit, one per vertex
  std::vector<std::array<int, 3>> triangles;  // 0-based vertex indices
  Rgb albedo;
  std::vector<Rgb> face_albedo;  // empty, or triangles.size() entries

  bool empty() const { return triangles.empty(); }

  Rgb triangle_albedo(std::size_t t) const {
    return face_albedo.empty() ? albedo : face_albedo[t];
  }

  /// Shift so the axis-aligned bounding box is centered on the origin.
  void recenter() {
    if (vertices.empty()) return;
    Vec3 lo = vertices[0], hi = vertices[0];
    for (const Vec3& v : vertices) {
      lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
      hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
    }
    const Vec3 c = (lo + hi) * 0.5;
    for (Vec3& v : vertices) v = v - c;
  }

  /// Area-weighted vertex normals (unnormalized cross products summed, then unit).
  void compute_normals() {
    normals.assign(vertices.size(), Vec3{});
    for (const auto& t : triangles) {
      const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
      for (int i : t) normals[i] = normals[i] + n;
    }
    for (Vec3& n : normals) n = n.normalized();
  }
};

/// Parse the ASCII mesh subset: `v x y z`, optional `vn x y z`, `f i j k`
/// (1-based, triangles only). `#` lines are comments. Normals are recomputed
/// when absent; the mesh is recentered.
inline Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("mesh file not found: " + path.string());

  Mesh mesh;
  std::vector<Vec3> file_normals;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v" || tag == "vn") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) fail("expected three coordinates after '" + tag + "'");
      (tag == "v" ? mesh.vertices : file_normals).push_back(p);
    } else if (tag == "f") {
      std::vector<long> idx;
      long i;
      while (ls >> i) idx.push_back(i);
      if (idx.size() != 3) fail("non-triangular face (" + std::to_string(idx.size()) + " indices)");
      std::array<int, 3> tri{};
      for (int j = 0; j < 3; ++j) {
        if (idx[j] < 1 || idx[j] > static_cast<long>(mesh.vertices.size()))
          fail("vertex index " + std::to_string(idx[j]) + " out of range");
        tri[j] = static_cast<int>(idx[j] - 1);
      }
      mesh.triangles.push_back(tri);
    } else {
      fail("unsupported line type '" + tag + "'");
    }
  }
  lineno = 0;
  if (mesh.triangles.empty()) throw DataError(path.string() + ": mesh has zero triangles");

  mesh.recenter();
  if (file_normals.size() == mesh.vertices.size()) {
    mesh.normals = file_normals;
    for (Vec3& n : mesh.normals) n = n.normalized();
  } else {
    mesh.compute_normals();
  }
  return mesh;
}

inline void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.precision(17);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace dtsynth
