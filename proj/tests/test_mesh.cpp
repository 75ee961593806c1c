#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "dtsynth/mesh.hpp"
#include "dtsynth/procedural.hpp"

using namespace dtsynth;

namespace {

std::filesystem::path write_temp_mesh(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("single triangle is recentered to the origin") {
  const auto path = write_temp_mesh("tri.mesh", "v 1 1 1\nv 3 1 1\nv 1 4 1\nf 1 2 3\n");
  const Mesh m = load_mesh(path);
  REQUIRE(m.triangles.size() == 1);
  // bounding box of the loaded vertices must be centered on the origin
  Vec3 lo = m.vertices[0], hi = m.vertices[0];
  for (const Vec3& v : m.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  CHECK((lo + hi).norm() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("out-of-range face index names the line") {
  const auto path = write_temp_mesh("bad_index.mesh", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  try {
    load_mesh(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
    CHECK(std::string(e.what()).find("9") != std::string::npos);
  }
}

TEST_CASE("non-triangular face rejected") {
  const auto path =
      write_temp_mesh("quad.mesh", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  CHECK_THROWS_AS(load_mesh(path), DataError);
}

TEST_CASE("zero triangles rejected") {
  const auto path = write_temp_mesh("noface.mesh", "v 0 0 0\nv 1 0 0\nv 0 1 0\n");
  CHECK_THROWS_AS(load_mesh(path), DataError);
}

TEST_CASE("missing file rejected") {
  CHECK_THROWS_AS(load_mesh("/nonexistent/nope.mesh"), DataError);
}

TEST_CASE("regular tetrahedron normals") {
  // Vertices of the regular tetrahedron at (±1,±1,±1) with an even number of
  // minus signs. By symmetry the area-weighted vertex normal at each vertex
  // points along the vertex direction itself.
  const auto path = write_temp_mesh(
      "tetra.mesh",
      "v 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nf 1 2 3\nf 1 4 2\nf 1 3 4\nf 2 4 3\n");
  const Mesh m = load_mesh(path);
  REQUIRE(m.normals.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(m.normals[i].norm() - 1.0) <= 1e-6);
    const Vec3 expected = m.vertices[i].normalized();
    CHECK((m.normals[i] - expected).norm() == Catch::Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("stored normals are kept and unit-normalized") {
  const auto path = write_temp_mesh("with_normals.mesh",
                                    "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
                                    "vn 0 0 2\nvn 0 0 2\nvn 0 0 2\nf 1 2 3\n");
  const Mesh m = load_mesh(path);
  for (const Vec3& n : m.normals) {
    CHECK(std::abs(n.norm() - 1.0) <= 1e-6);
    CHECK(n.z == Catch::Approx(1.0));
  }
}

TEST_CASE("procedural meshes satisfy the mesh invariants") {
  for (const char* name : {"box", "plain-box", "bottle", "bag", "tetra"}) {
    const Mesh m = make_builtin_mesh(name);
    INFO(name);
    REQUIRE(!m.empty());
    for (const auto& t : m.triangles)
      for (int i : t) REQUIRE(i < static_cast<int>(m.vertices.size()));
    for (const Vec3& n : m.normals) CHECK(std::abs(n.norm() - 1.0) <= 1e-6);
    if (!m.face_albedo.empty()) CHECK(m.face_albedo.size() == m.triangles.size());
  }
}

TEST_CASE("save and reload round-trips geometry") {
  const Mesh m = make_tetrahedron();
  const auto path = std::filesystem::temp_directory_path() / "roundtrip.mesh";
  save_mesh(m, path);
  const Mesh r = load_mesh(path);
  REQUIRE(r.vertices.size() == m.vertices.size());
  REQUIRE(r.triangles == m.triangles);
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    CHECK((r.vertices[i] - m.vertices[i]).norm() == Catch::Approx(0.0).margin(1e-12));
}
