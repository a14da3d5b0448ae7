#include <doctest.h>

#include "kinflow/error.hpp"
#include "kinflow/mesh.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

using namespace kinflow;

namespace {

const char* kUnitCubeTets = R"(kinmesh 1
# unit cube split along the main diagonal
nodes 8
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
cells 6
tet 1 2 3 7
tet 1 3 4 7
tet 1 4 8 7
tet 1 8 5 7
tet 1 5 6 7
tet 1 6 2 7
)";

const char* kUnitHex = R"(kinmesh 1
nodes 8
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
cells 1
hex 1 2 3 4 5 6 7 8
boundary 6
wall 1 2 3 4
wall 5 6 7 8
wall 1 2 6 5
wall 2 3 7 6
wall 3 4 8 7
wall 4 1 5 8
)";

Mesh parse(const char* text) {
  std::istringstream in(text);
  return compute_geometry(parse_native_mesh(in, "test"));
}

// Independent oracle: edge-midpoint rule on each triangle is exact for quadratics.
double triangle_integral(const Vec3& a, const Vec3& b, const Vec3& c,
                         const std::function<double(const Vec3&)>& f) {
  const double area = 0.5 * (b - a).cross(c - a).norm();
  return area / 3.0 * (f(0.5 * (a + b)) + f(0.5 * (b + c)) + f(0.5 * (a + c)));
}

void check_closure(const Mesh& mesh) {
  for (int c = 0; c < mesh.num_cells(); ++c) {
    Vec3 sum = Vec3::Zero();
    double surface = 0.0;
    for (int f : mesh.cellFaces[c]) {
      sum += mesh.orientation(c, f) * mesh.faces[f].area * mesh.faces[f].normal;
      surface += mesh.faces[f].area;
    }
    CHECK(sum.norm() <= 1e-12 * surface);
  }
}

void check_frames(const Mesh& mesh) {
  for (const auto& f : mesh.faces) {
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f.t1.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f.t2.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f.normal.dot(f.t1)) < 1e-12);
    CHECK(std::abs(f.normal.dot(f.t2)) < 1e-12);
    CHECK(std::abs(f.t1.dot(f.t2)) < 1e-12);
    CHECK(f.normal.cross(f.t1).dot(f.t2) > 0.0);
    double w = 0.0;
    for (const auto& q : f.gauss) w += q.weight;
    CHECK(std::abs(w - 1.0) < 1e-12);
  }
}

}  // namespace

TEST_CASE("unit cube split into six tetrahedra") {
  const Mesh mesh = parse(kUnitCubeTets);
  CHECK(mesh.num_cells() == 6);
  CHECK(mesh.total_volume() == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& c : mesh.cells) CHECK(c.volume == doctest::Approx(1.0 / 6.0));
  check_closure(mesh);
  check_frames(mesh);
}

TEST_CASE("unit hexahedron") {
  const Mesh mesh = parse(kUnitHex);
  REQUIRE(mesh.num_cells() == 1);
  CHECK(mesh.cells[0].volume == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((mesh.cells[0].centroid - Vec3(0.5, 0.5, 0.5)).norm() < 1e-14);
  REQUIRE(mesh.num_faces() == 6);
  for (const auto& f : mesh.faces) {
    CHECK(f.area == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.tag == "wall");
    CHECK(f.planar);
    // outward
    CHECK(f.normal.dot(f.centroid - mesh.cells[0].centroid) > 0.0);
  }
  check_closure(mesh);
}

TEST_CASE("regular simplex volume and centroid") {
  MeshData data;
  data.nodes = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  // Deliberately negatively oriented; geometry must fix it.
  data.cells.push_back({CellKind::Tetrahedron, {0, 2, 1, 3}, 0.0, Vec3::Zero()});
  const Mesh mesh = compute_geometry(data);
  CHECK(mesh.cells[0].volume == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK((mesh.cells[0].centroid - Vec3(0.25, 0.25, 0.25)).norm() < 1e-15);
  check_closure(mesh);
}

TEST_CASE("unit square quad face uses the 2x2 Gauss-Legendre rule") {
  const Mesh mesh = parse(kUnitHex);
  const double g = 0.5 / std::sqrt(3.0);
  for (const auto& f : mesh.faces) {
    if (std::abs(f.centroid.z()) > 1e-14) continue;
    REQUIRE(f.gauss.size() == 4);
    for (const auto& q : f.gauss) {
      CHECK(q.weight == doctest::Approx(0.25).epsilon(1e-14));
      CHECK(std::abs(std::abs(q.position.x() - 0.5) - g) < 1e-14);
      CHECK(std::abs(std::abs(q.position.y() - 0.5) - g) < 1e-14);
      CHECK(std::abs(q.position.z()) < 1e-15);
    }
  }
}

TEST_CASE("periodic box generator") {
  const Mesh mesh = compute_geometry(make_periodic_box(10));
  CHECK(mesh.num_cells() == 6000);
  CHECK(std::abs(mesh.total_volume() - 8.0) <= 1e-12 * 8.0);
  int boundary = 0;
  for (const auto& f : mesh.faces) {
    if (f.cells.size() == 1) {
      ++boundary;
      CHECK(f.tag.rfind("periodic_", 0) == 0);
    }
  }
  CHECK(boundary == 6 * 2 * 100);
  check_closure(mesh);
  check_frames(mesh);
}

TEST_CASE("hex box generator") {
  const Mesh mesh = compute_geometry(make_hex_box(3, 4, 5, Vec3(1.5, 2.0, 2.5), false));
  CHECK(mesh.num_cells() == 60);
  CHECK(mesh.total_volume() == doctest::Approx(7.5).epsilon(1e-13));
  check_closure(mesh);
}

TEST_CASE("face quadrature integrates quadratics exactly") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  // A skewed hexahedron with planar but non-rectangular faces plus tets.
  MeshData data = make_hex_box(2, 2, 2, Vec3(1.0, 1.3, 0.7), false);
  for (auto& x : data.nodes) x = Vec3(x.x() + 0.3 * x.y(), x.y() + 0.2 * x.z(), x.z() + 0.1 * x.x());
  const Mesh hexes = compute_geometry(data);
  const Mesh tets = compute_geometry(make_periodic_box(2, 1.0));
  for (const Mesh* mesh : {&hexes, &tets}) {
    for (const auto& f : mesh->faces) {
      std::array<double, 10> c;
      for (auto& v : c) v = coef(rng);
      auto poly = [&](const Vec3& p) {
        const double x = p.x(), y = p.y(), z = p.z();
        return c[0] + c[1] * x + c[2] * y + c[3] * z + c[4] * x * x + c[5] * y * y + c[6] * z * z +
               c[7] * x * y + c[8] * y * z + c[9] * x * z;
      };
      double exact = 0.0;
      for (const auto& t : f.triangles)
        exact += triangle_integral(mesh->nodes[t[0]], mesh->nodes[t[1]], mesh->nodes[t[2]], poly);
      double approx = 0.0;
      for (const auto& q : f.gauss) approx += q.weight * poly(q.position);
      approx *= f.area;
      CHECK(std::abs(approx - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
      for (const auto& q : f.gauss)
        CHECK(std::abs(f.normal.dot(q.position - f.centroid)) <= 1e-10 * std::sqrt(f.area));
    }
  }
}

TEST_CASE("cell quadrature is exact for quadratics") {
  const Mesh mesh = compute_geometry(make_hex_box(1, 1, 1, Vec3(2.0, 1.0, 3.0), false));
  double sum = 0.0, xx = 0.0;
  for (const auto& q : cell_quadrature(mesh, 0)) {
    sum += q.weight;
    xx += q.weight * q.position.x() * q.position.x();
  }
  CHECK(sum == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(xx == doctest::Approx(8.0 / 3.0 * 3.0).epsilon(1e-13));
}

TEST_CASE("sphere shell generator") {
  SphereMeshOptions opts;
  const int n = 4;
  const Mesh mesh = compute_geometry(make_sphere_shell(n, opts));
  CHECK(mesh.num_cells() == 12 * n * n * n);
  int wall = 0, far = 0;
  double wallArea = 0.0;
  for (const auto& f : mesh.faces) {
    if (f.cells.size() != 1) continue;
    if (f.tag == "wall") {
      ++wall;
      wallArea += f.area;
      CHECK(f.normal.dot(f.centroid) < 0.0);
    } else {
      CHECK(f.tag == "farfield");
      ++far;
    }
  }
  CHECK(wall == 6 * n * n);
  CHECK(far == 6 * n * n);
  CHECK(wallArea < std::numbers::pi);
  CHECK(wallArea > 0.9 * std::numbers::pi);
  const double shell = 4.0 / 3.0 * std::numbers::pi * (20.0 * 20.0 * 20.0 - 0.125);
  CHECK(mesh.total_volume() < shell);
  CHECK(mesh.total_volume() > 0.8 * shell);
  check_closure(mesh);
  check_frames(mesh);

  // First cell height next to the wall.
  double minRadius = 1e300;
  for (const auto& x : mesh.nodes) minRadius = std::min(minRadius, x.norm());
  CHECK(minRadius == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("grading ratio") {
  const double q = grading_ratio(0.01, 19.5, 32);
  double sum = 0.0, h = 0.01;
  for (int k = 0; k < 32; ++k, h *= q) sum += h;
  CHECK(sum == doctest::Approx(19.5).epsilon(1e-12));
  CHECK(grading_ratio(1.0, 4.0, 4) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("native format round trip") {
  std::istringstream in(kUnitHex);
  const MeshData a = parse_native_mesh(in);
  std::ostringstream out;
  write_native_mesh(a, out);
  std::istringstream back(out.str());
  const MeshData b = parse_native_mesh(back);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) CHECK(a.nodes[i] == b.nodes[i]);
  CHECK(a.cells[0].nodes == b.cells[0].nodes);
  CHECK(b.boundary.size() == 6);
}

TEST_CASE("native parse errors carry line numbers") {
  {
    std::istringstream in("kinmesh 1\nnodes 2\n0 0 0\n1 1\n");
    try {
      parse_native_mesh(in, "bad");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  {
    std::istringstream in("kinmesh 1\nnodes 1\n0 0 0\ncells 1\ntet 1 2 3 4\n");
    CHECK_THROWS_AS(parse_native_mesh(in), ParseError);
  }
  {
    std::istringstream in("kinmesh 1\nnodes 1\n0 0 0\ncells 1\nprism 1 1 1 1 1 1\n");
    CHECK_THROWS_AS(parse_native_mesh(in), UnsupportedElementError);
  }
  {
    std::istringstream in("mesh 2\n");
    CHECK_THROWS_AS(parse_native_mesh(in), ParseError);
  }
}

TEST_CASE("gmsh reader") {
  const char* text = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
2 1 "wall"
3 2 "fluid"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 0 1 0
4 0 0 1
$EndNodes
$Elements
3
1 15 2 0 1 1
2 2 2 1 1 1 2 3
3 4 2 2 1 1 2 3 4
$EndElements
)";
  std::istringstream in(text);
  const MeshData data = parse_gmsh_mesh(in, "t.msh");
  REQUIRE(data.cells.size() == 1);
  REQUIRE(data.boundary.size() == 1);
  CHECK(data.boundary[0].tag == "wall");
  const Mesh mesh = compute_geometry(data);
  CHECK(mesh.cells[0].volume == doctest::Approx(1.0 / 6.0));

  std::string prism = text;
  prism.replace(prism.find("3 4 2 2 1"), 9, "3 6 2 2 1");
  std::istringstream bad(prism);
  CHECK_THROWS_AS(parse_gmsh_mesh(bad), UnsupportedElementError);
}

TEST_CASE("degenerate cell is reported") {
  MeshData data;
  data.nodes = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  data.cells.push_back({CellKind::Tetrahedron, {0, 1, 2, 3}, 0.0, Vec3::Zero()});
  try {
    compute_geometry(data);
    FAIL("expected GeometryError");
  } catch (const GeometryError& e) {
    CHECK(e.cell() == 0);
  }
}
