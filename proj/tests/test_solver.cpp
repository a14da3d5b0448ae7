#include "kinflow/solver.hpp"

#include "kinflow/error.hpp"
#include "kinflow/output.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace kinflow;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("kinflow_test_solver_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_box(int steps) {
  RunConfig c;
  c.n = 4;
  c.maxSteps = steps;
  return c;
}

double max_relative_difference(const std::vector<State<double>>& a, const std::vector<State<double>>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c)
    for (int v = 0; v < kNumVars; ++v)
      worst = std::max(worst, std::abs(a[c][v] - b[c][v]) / std::max(1.0, std::abs(b[c][v])));
  return worst;
}

}  // namespace

TEST_CASE("config file lines and overrides") {
  RunConfig c;
  std::istringstream in("# advection study\ncase = advection_box\nn = 20   # finer\nprecision = fp32\n\ncfl=0.25\n");
  parse_config(in, c);
  CHECK(c.caseKind == CaseKind::AdvectionBox);
  CHECK(c.n == 20);
  CHECK(c.precision == Precision::FP32);
  CHECK(c.cfl_for(true) == doctest::Approx(0.25));
  c.set("n", "10");
  CHECK(c.n == 10);

  RunConfig d;
  CHECK(d.cfl_for(true) == 0.3);
  CHECK(d.cfl_for(false) == 0.5);
  CHECK(d.c1_value() == 0.0);
  d.caseKind = CaseKind::Sphere;
  CHECK(d.c1_value() == 1.0);
  CHECK(d.free_stream_viscosity() == doctest::Approx(0.2535 / 118.0));

  CHECK_THROWS_AS(c.set("no-such-key", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("n", "ten"), ConfigError);
  CHECK_THROWS_AS(c.set("precision", "fp16"), ConfigError);
  std::istringstream bad("n = 4\nthis line has no equals sign\n");
  try {
    parse_config(bad, c, "bad.cfg");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  RunConfig invalid;
  invalid.parts = 0;
  CHECK_THROWS_AS(invalid.validate(), ConfigError);
}

TEST_CASE("advection initial state and exact error norms") {
  const Problem pb = build_problem(small_box(0));
  REQUIRE(pb.initial.size() == 6u * 4 * 4 * 4);
  // The sine integrates to zero over whole periods.
  const State<double> totals = conserved_totals(pb.mesh, pb.initial);
  CHECK(totals[0] == doctest::Approx(8.0).epsilon(1e-13));
  CHECK(totals[1] == doctest::Approx(8.0).epsilon(1e-13));
  CHECK(totals[4] == doctest::Approx(8.0 * (2.5 + 1.5)).epsilon(1e-13));
  for (const auto& s : pb.initial) {
    const Primitive q = to_primitive(s, 1.4);
    CHECK(q.p == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(q.u == doctest::Approx(1.0).epsilon(1e-13));
  }

  const ErrorNorms exact = density_error(pb.mesh, pb.initial, advection_exact_averages(pb.mesh, 0.0));
  CHECK(exact.l1 <= 1e-14);
  CHECK(exact.linf <= 1e-14);
  // The travelling wave returns to itself after one period of the box.
  const auto later = advection_exact_averages(pb.mesh, 2.0 / 3.0);
  for (std::size_t c = 0; c < later.size(); ++c) CHECK(later[c] == doctest::Approx(pb.initial[c][0]).epsilon(1e-12));
}

TEST_CASE("three-point cell averages integrate cubics exactly") {
  const Problem pb = build_problem(small_box(0));
  const ScalarField cubic = [](const Vec3& x) { return x.x() * x.x() * x.y() + x.z() * x.z() * x.z() - x.y(); };
  double sum = 0.0;
  for (int c = 0; c < pb.mesh.num_cells(); ++c) sum += cell_average(pb.mesh, c, cubic, 3) * pb.mesh.cells[c].volume;
  // Integral over [0,2]^3: 32/3 + 16 - 8.
  CHECK(sum == doctest::Approx(32.0 / 3.0 + 8.0).epsilon(1e-13));
}

TEST_CASE("one step per partition count matches the single domain") {
  RunConfig config = small_box(5);
  Problem pb = build_problem(config);
  const RunResult single = run_problem(pb, config);
  CHECK(single.steps == 5);
  CHECK(single.conservationDrift <= 1e-13);
  for (int parts : {2, 4, 8}) {
    CAPTURE(parts);
    repartition(pb, parts);
    config.parts = parts;
    const RunResult split = run_problem(pb, config);
    CHECK(split.steps == single.steps);
    CHECK(max_relative_difference(split.fields, single.fields) <= 1e-12);
    REQUIRE(split.error);
    CHECK(std::abs(split.error->l1 - single.error->l1) <= 1e-12 * single.error->l1);
  }
}

TEST_CASE("sphere steps are partition invariant") {
  RunConfig config;
  config.caseKind = CaseKind::Sphere;
  config.n = 2;
  config.maxSteps = 3;
  Problem pb = build_problem(config);
  const RunResult single = run_problem(pb, config);
  repartition(pb, 3);
  config.parts = 3;
  const RunResult split = run_problem(pb, config);
  CHECK(max_relative_difference(split.fields, single.fields) <= 1e-12);
}

TEST_CASE("free stream is preserved around a sphere with farfield surface") {
  RunConfig config;
  config.caseKind = CaseKind::Sphere;
  config.n = 2;
  config.wall = "farfield";
  config.maxSteps = 20;
  const Problem pb = build_problem(config);
  const RunResult r = run_problem(pb, config);
  CHECK(r.steps == 20);
  CHECK(max_relative_difference(r.fields, pb.initial) <= 1e-11);
}

TEST_CASE("precision toggle keeps the step schedule") {
  RunConfig config = small_box(0);
  config.stopTime = 0.1;
  const RunResult fp64 = run_simulation(config);
  config.precision = Precision::FP32;
  const RunResult fp32 = run_simulation(config);
  CHECK(fp32.steps == fp64.steps);
  CHECK(fp32.time == fp64.time);
  CHECK(fp64.time == 0.1);
  REQUIRE(fp32.error);
  CHECK(fp32.error->l1 == doctest::Approx(fp64.error->l1).epsilon(0.05));
  CHECK(max_relative_difference(fp32.fields, fp64.fields) <= 1e-4);
}

TEST_CASE("timing report covers the wall time") {
  RunConfig config = small_box(20);
  config.n = 6;
  const RunResult r = run_simulation(config);
  REQUIRE(r.wallTime > 0.0);
  CHECK(std::abs(r.wallTime - r.phases.sum()) <= 0.05 * r.wallTime);
  const std::string report = format_report(r, config);
  CHECK(report.find("communication") != std::string::npos);
  CHECK(report.find("density error L1") != std::string::npos);
}

TEST_CASE("single cell VTK file") {
  MeshData data;
  data.nodes = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  data.cells.push_back(Cell{CellKind::Tetrahedron, {0, 1, 2, 3}});
  const Mesh mesh = compute_geometry(std::move(data));
  const auto dir = scratch("vtk");
  const std::vector<int> cells = {0};
  const std::vector<State<double>> fields = {to_conservative<double>({1.0, 0.5, 0.0, 0.0, 1.0}, 1.4)};
  write_vtk(dir / "one.vtk", mesh, cells, fields, 1.4);
  const std::string text = slurp(dir / "one.vtk");
  CHECK(text.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(text.find("POINTS 4 double") != std::string::npos);
  CHECK(text.find("CELLS 1 5\n4 0 1 2 3\n") != std::string::npos);
  CHECK(text.find("CELL_TYPES 1\n10\n") != std::string::npos);
  CHECK(text.find("SCALARS density double 1\nLOOKUP_TABLE default\n1\n") != std::string::npos);
  CHECK(text.find("VECTORS velocity double\n0.5 0 0\n") != std::string::npos);
  CHECK(text.find("SCALARS pressure double 1\nLOOKUP_TABLE default\n1\n") != std::string::npos);

  CHECK_THROWS_AS(write_vtk(dir / "one.vtk" / "nested.vtk", mesh, cells, fields, 1.4), IoError);
}

TEST_CASE("merged partition output equals single partition output") {
  RunConfig config = small_box(3);
  const auto singleDir = scratch("merge1");
  config.output = singleDir;
  Problem pb = build_problem(config);
  const RunResult single = run_problem(pb, config);
  repartition(pb, 4);
  config.parts = 4;
  config.output = scratch("merge4");
  const RunResult split = run_problem(pb, config);
  const std::string one = slurp(singleDir / "solution_0000.vtk");
  CHECK(!one.empty());
  CHECK(slurp(config.output / "solution_0000.vtk") == one);
  for (int p = 0; p < 4; ++p) CHECK(std::filesystem::exists(config.output / ("solution_0000_p" + std::to_string(p) + ".vtk")));
  CHECK(split.files.size() == 5);
  CHECK(single.files.size() == 1);
}

TEST_CASE("checkpoint round trip and restart") {
  const auto dir = scratch("checkpoint");
  RunConfig config = small_box(4);
  const Problem pb = build_problem(config);

  CheckpointHeader header;
  header.cells = pb.initial.size();
  header.time = 0.0;
  write_checkpoint(dir / "initial.kfc", header, pb.initial);
  const Checkpoint back = read_checkpoint(dir / "initial.kfc");
  REQUIRE(back.fields.size() == pb.initial.size());
  for (std::size_t c = 0; c < back.fields.size(); ++c)
    for (int v = 0; v < kNumVars; ++v)
      CHECK(std::bit_cast<std::uint64_t>(back.fields[c][v]) == std::bit_cast<std::uint64_t>(pb.initial[c][v]));
  CHECK(back.header.gamma == 1.4);
  CHECK(back.header.precision == "fp64");

  // The custom case on the same mesh and fields reproduces the advection run.
  {
    std::ofstream mesh(dir / "box.mesh");
    write_native_mesh(make_periodic_box(4, 2.0), mesh);
  }
  RunConfig custom = config;
  custom.caseKind = CaseKind::Custom;
  custom.mesh = dir / "box.mesh";
  custom.initial = dir / "initial.kfc";
  custom.c1 = 0.0;
  custom.timeStep = TimeStepMode::Fixed;
  const RunResult a = run_simulation(config);
  const RunResult b = run_simulation(custom);
  CHECK(max_relative_difference(a.fields, b.fields) == 0.0);

  {
    std::ofstream truncated(dir / "short.kfc", std::ios::binary);
    const std::string full = slurp(dir / "initial.kfc");
    truncated << full.substr(0, full.size() - 8);
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "short.kfc"), IoError);
  CHECK_THROWS_AS(read_checkpoint(dir / "missing.kfc"), IoError);
  custom.initial = dir / "short.kfc";
  CHECK_THROWS_AS(run_simulation(custom), IoError);
}

TEST_CASE("run writes a final checkpoint") {
  RunConfig config = small_box(2);
  config.output = scratch("final");
  config.checkpoint = true;
  const RunResult r = run_simulation(config);
  const Checkpoint cp = read_checkpoint(config.output / "checkpoint.kfc");
  CHECK(cp.header.step == 2);
  CHECK(cp.header.time == r.time);
  CHECK(max_relative_difference(cp.fields, r.fields) == 0.0);
}

TEST_CASE("positivity failure aborts with a state dump") {
  RunConfig config = small_box(50);
  config.cfl = 8.0;
  config.output = scratch("failure");
  bool dumped = false;
  try {
    run_simulation(config);
  } catch (const PositivityError& e) {
    CHECK(std::string(e.what()).find("smaller CFL") != std::string::npos);
    for (const auto& entry : std::filesystem::directory_iterator(config.output))
      dumped = dumped || entry.path().filename().string().rfind("failure_", 0) == 0;
  }
  CHECK(dumped);
}

TEST_CASE("wake metrics") {
  const Mesh mesh = compute_geometry(make_sphere_shell(6, {1.0, 20.0, 0.01}));
  std::vector<char> isWall(mesh.cells.size(), 0);
  for (const Face& f : mesh.faces)
    if (f.cells.size() == 1 && f.tag == "wall") isWall[f.cells[0]] = 1;

  SUBCASE("attached flow has no wake") {
    std::vector<State<double>> fields(mesh.cells.size(), to_conservative<double>({1.0, 0.3, 0.0, 0.0, 1.0}, 1.4));
    const WakeMetrics w = wake_metrics(mesh, fields, 1.0);
    CHECK(!w.length);
    CHECK(!w.separationDeg);
  }

  SUBCASE("synthetic recirculation") {
    // Axial velocity x - 1.7 behind the sphere, surface flow reversing at 120 degrees.
    const double reverse = 120.0 * std::numbers::pi / 180.0;
    std::vector<State<double>> fields(mesh.cells.size());
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const Vec3& x = mesh.cells[c].centroid;
      Vec3 u(x.x() - 1.7, 0.0, 0.0);
      if (isWall[c]) {
        const Vec3 r = x.normalized();
        const double phi = std::acos(std::clamp(-r.x(), -1.0, 1.0));
        const Vec3 ePhi(std::sin(phi), std::cos(phi) * r.y() / std::max(std::hypot(r.y(), r.z()), 1e-300),
                        std::cos(phi) * r.z() / std::max(std::hypot(r.y(), r.z()), 1e-300));
        u = (std::cos(phi) - std::cos(reverse)) * ePhi;
      }
      fields[c] = to_conservative<double>({1.0, u.x(), u.y(), u.z(), 1.0}, 1.4);
    }
    const WakeMetrics w = wake_metrics(mesh, fields, 1.0);
    REQUIRE(w.length);
    CHECK(*w.length == doctest::Approx(1.2).epsilon(1e-9));
    REQUIRE(w.separationDeg);
    CHECK(*w.separationDeg == doctest::Approx(120.0).epsilon(0.02));
  }
}
