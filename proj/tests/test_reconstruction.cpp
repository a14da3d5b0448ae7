#include "kinflow/reconstruction.hpp"

#include "kinflow/error.hpp"

#include <doctest.h>

#include <functional>
#include <random>
#include <set>

using namespace kinflow;

namespace {

using Field = std::function<double(const Vec3&)>;

struct Setup {
  Mesh mesh;
  Connectivity tables;
  CellMoments moments;
  std::vector<ReconstructionOperator> ops;

  explicit Setup(MeshData data) : mesh(compute_geometry(std::move(data))) {
    tables = build_full_connectivity(mesh, BoundaryConditions::defaults());
    moments = CellMoments::compute(mesh);
    for (int c = 0; c < tables.numPhysical; ++c)
      ops.push_back(build_reconstruction_operator(mesh, tables, moments, c, select_stencils(tables, mesh, c)));
  }

  /// Exact cell average of f over every extended cell (geometry carried by
  /// the ghost transform).
  std::vector<State<double>> averages(const Field& f) const {
    std::vector<State<double>> out(static_cast<std::size_t>(tables.num_extended()));
    for (int c = 0; c < tables.num_extended(); ++c) {
      const int m = tables.mirror(c);
      const AffineMap map = tables.transform(c);
      double sum = 0.0;
      for (const auto& q : cell_quadrature(mesh, m)) sum += q.weight * f(map.apply(q.position));
      const double avg = sum / mesh.cells[m].volume;
      for (int v = 0; v < kNumVars; ++v) out[c][v] = (v + 1) * avg;
    }
    return out;
  }
};

std::array<double, 3> arr(const Vec3& x) { return {x.x(), x.y(), x.z()}; }

/// Checks value and gradient of both reconstructions on every face point of
/// every physical cell.
void check_exact(const Setup& s, const Field& f, const std::function<Vec3(const Vec3&)>& grad, double tol,
                 bool checkWeno) {
  const ReconstructionPlan<double> plan(s.ops);
  const auto fields = s.averages(f);
  CellPolynomial<double> weno, smooth;
  double worst = 0.0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    plan.reconstruct(i, fields, weno, smooth);
    for (int face : s.mesh.cellFaces[i]) {
      for (const auto& g : s.mesh.faces[face].gauss) {
        for (const auto* poly : {&smooth, &weno}) {
          if (poly == &weno && !checkWeno) continue;
          const auto p = plan.evaluate(i, *poly, arr(g.position));
          const Vec3 dg = grad(g.position);
          for (int v = 0; v < kNumVars; ++v) {
            worst = std::max(worst, std::abs(p.value[v] - (v + 1) * f(g.position)));
            for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(p.gradient[k][v] - (v + 1) * dg[k]));
          }
        }
      }
    }
  }
  CHECK(worst <= tol);
}

}  // namespace

TEST_CASE("linear fields are reconstructed exactly") {
  const Field f = [](const Vec3& x) { return 1.5 + 0.3 * x.x() - 0.7 * x.y() + 0.2 * x.z(); };
  const auto grad = [](const Vec3&) { return Vec3(0.3, -0.7, 0.2); };
  SUBCASE("periodic tetrahedra, including across periodic images") {
    check_exact(Setup(make_periodic_box(4)), f, grad, 1e-10, true);
  }
  SUBCASE("walled hexahedra") {
    check_exact(Setup(make_hex_box(4, 4, 4, Vec3(1.0, 1.2, 0.8), false)), f, grad, 1e-10, true);
  }
  SUBCASE("graded curved hexahedra") {
    SphereMeshOptions opts;
    opts.outerRadius = 3.0;
    opts.firstHeight = 0.05;
    check_exact(Setup(make_sphere_shell(2, opts)), f, grad, 1e-10, true);
  }
}

TEST_CASE("quadratic fields are reconstructed exactly by the big stencil") {
  const Field f = [](const Vec3& x) { return x.x() * x.x() - 0.5 * x.y() * x.z() + x.z(); };
  const auto grad = [](const Vec3& x) { return Vec3(2.0 * x.x(), -0.5 * x.z(), 1.0 - 0.5 * x.y()); };
  check_exact(Setup(make_periodic_box(4)), f, grad, 1e-10, false);
  check_exact(Setup(make_hex_box(4, 4, 4, Vec3(1.0, 1.0, 1.0), false)), f, grad, 1e-10, false);
}

TEST_CASE("x^2 on a Cartesian grid has unit quadratic coefficient") {
  const Setup s(make_hex_box(4, 4, 4, Vec3(1.0, 1.0, 1.0), false));
  const ReconstructionPlan<double> plan(s.ops);
  const auto fields = s.averages([](const Vec3& x) { return x.x() * x.x(); });
  CellPolynomial<double> weno, smooth;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    plan.reconstruct(i, fields, weno, smooth);
    const double r2 = 1.0 / (plan.target(i).invRadius * plan.target(i).invRadius);
    CHECK(smooth.coeffs[3][0] / r2 == doctest::Approx(1.0).epsilon(1e-10));
    for (int r : {1, 2, 4, 5, 6, 7, 8}) CHECK(std::abs(smooth.coeffs[r][0]) < 1e-10);
  }
}

TEST_CASE("non-linear weights") {
  SUBCASE("equal indicators return the linear weights") {
    const std::array<double, 5> beta = {0.3, 0.3, 0.3, 0.3, 0.3};
    const std::array<double, 5> gamma = {0.9, 0.025, 0.025, 0.025, 0.025};
    std::array<double, 5> omega{};
    weno_weights<double>(beta, gamma, omega);
    for (int k = 0; k < 5; ++k) CHECK(omega[k] == doctest::Approx(gamma[k]).epsilon(1e-15));
  }
  SUBCASE("combination with linear weights collapses to the quadratic") {
    // For a linear field every candidate agrees, so the non-linear result
    // must coincide with the big-stencil polynomial.
    const Setup s(make_periodic_box(3));
    const ReconstructionPlan<double> plan(s.ops);
    const auto fields = s.averages([](const Vec3& x) { return 2.0 - x.x() + 0.5 * x.z(); });
    CellPolynomial<double> weno, smooth;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      plan.reconstruct(i, fields, weno, smooth);
      for (int r = 0; r < kNumBasis; ++r)
        for (int v = 0; v < kNumVars; ++v) CHECK(std::abs(weno.coeffs[r][v] - smooth.coeffs[r][v]) <= 1e-13);
    }
  }
}

TEST_CASE("equal indicators collapse the combination to the quadratic") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int numSubs : {4, 8}) {
    std::vector<double> gamma(static_cast<std::size_t>(numSubs + 1), kSubStencilWeight);
    gamma[0] = 1.0 - kSubStencilWeight * numSubs;
    for (int trial = 0; trial < 200; ++trial) {
      std::array<double, kNumBasis> p0;
      for (auto& x : p0) x = d(rng);
      std::vector<std::array<double, kNumLinear>> linear(static_cast<std::size_t>(numSubs));
      for (auto& b : linear)
        for (auto& x : b) x = d(rng);
      const std::vector<double> beta(gamma.size(), std::abs(d(rng)));
      std::vector<double> omega(gamma.size());
      weno_weights<double>(beta, gamma, omega);
      const auto out = weno_combine<double>(p0, linear, gamma, omega);
      for (int r = 0; r < kNumBasis; ++r) CHECK(std::abs(out[r] - p0[r]) <= 1e-13 * std::max(1.0, std::abs(p0[r])));
    }
  }
}

TEST_CASE("a density step suppresses the sub-stencils that cross it") {
  const int n = 6;
  const Setup s(make_hex_box(n, n, n, Vec3(1.0, 1.0, 1.0), false));
  // Step at x = 0.5 on the cell averages (exact for cells, piecewise constant).
  std::vector<State<double>> fields(static_cast<std::size_t>(s.tables.num_extended()));
  for (int c = 0; c < s.tables.num_extended(); ++c) {
    const double x = extended_centroid(s.tables, s.mesh, c).x();
    fields[c] = {x < 0.5 ? 1.0 : 2.0, 0.0, 0.0, 0.0, 2.5};
  }
  const ReconstructionPlan<double> plan(s.ops);
  int checked = 0;
  for (int c = 0; c < s.tables.numPhysical; ++c) {
    const double x = s.mesh.cells[c].centroid.x();
    if (std::abs(x - 0.5) > 0.1) continue;
    const auto& op = s.ops[c];
    std::vector<double> beta(op.subs.size() + 1);
    std::vector<bool> crossing(op.subs.size());
    // Indicators recomputed in double from the operator.
    std::array<double, kNumBasis> a{};
    for (std::size_t k = 0; k < op.big.size(); ++k)
      for (int r = 0; r < kNumBasis; ++r)
        a[r] += op.bigPinv(r, static_cast<Eigen::Index>(k)) * (fields[op.big[k]][0] - fields[c][0]);
    beta[0] = smoothness_quadratic(a, op);
    for (std::size_t m = 0; m < op.subs.size(); ++m) {
      std::array<double, kNumLinear> b{};
      crossing[m] = false;
      for (std::size_t k = 0; k < op.subs[m].size(); ++k) {
        const double d = fields[op.subs[m][k]][0] - fields[c][0];
        crossing[m] = crossing[m] || d != 0.0;
        for (int r = 0; r < kNumLinear; ++r) b[r] += op.subPinv[m](r, static_cast<Eigen::Index>(k)) * d;
      }
      beta[m + 1] = smoothness_linear(b, op);
    }
    std::vector<double> omega(beta.size());
    weno_weights<double>(beta, op.linearWeights, omega);
    double smoothMin = 1e300, crossMax = 0.0;
    int nSmooth = 0, nCross = 0;
    for (std::size_t m = 0; m < op.subs.size(); ++m) {
      if (crossing[m]) {
        crossMax = std::max(crossMax, omega[m + 1]);
        ++nCross;
      } else {
        smoothMin = std::min(smoothMin, omega[m + 1]);
        ++nSmooth;
      }
    }
    REQUIRE(nSmooth > 0);
    REQUIRE(nCross > 0);
    CHECK(crossMax < 1e-3 * smoothMin);
    ++checked;
  }
  CHECK(checked == 2 * n * n);
}

TEST_CASE("smoothness indicators") {
  SUBCASE("P = x on a unit cube gives one") {
    const Setup s(make_hex_box(3, 3, 3, Vec3(3.0, 3.0, 3.0), false));
    const auto& op = s.ops[13];  // centre cell
    REQUIRE(op.volume == doctest::Approx(1.0));
    std::array<double, kNumBasis> a{};
    a[0] = op.radius;  // x - x0 = radius * xi
    CHECK(smoothness_quadratic(a, op) == doctest::Approx(1.0).epsilon(1e-12));
    const std::array<double, kNumLinear> b = {op.radius, 0.0, 0.0};
    CHECK(smoothness_linear(b, op) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("quadratic indicator matches a sampled integral over a tetrahedron") {
    const Setup s(make_periodic_box(3));
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int cell : {0, 7, 31}) {
      const auto& op = s.ops[cell];
      std::array<double, kNumBasis> a;
      for (auto& x : a) x = coef(rng);
      // Same polynomial in physical coordinates: P(x) = sum a_k phi_k(xi(x)).
      auto gradient = [&](const Vec3& x) -> Vec3 {
        const Vec3 xi = (x - op.center) / op.radius;
        return Vec3(a[0] + 2 * a[3] * xi.x() + a[6] * xi.y() + a[8] * xi.z(),
                    a[1] + 2 * a[4] * xi.y() + a[6] * xi.x() + a[7] * xi.z(),
                    a[2] + 2 * a[5] * xi.z() + a[7] * xi.y() + a[8] * xi.x()) /
               op.radius;
      };
      const double r2 = op.radius * op.radius;
      // Uniform samples in the tetrahedron through sorted uniforms.
      const auto& nodes = s.mesh.cells[cell].nodes;
      const Vec3 p0 = s.mesh.nodes[nodes[0]], p1 = s.mesh.nodes[nodes[1]], p2 = s.mesh.nodes[nodes[2]],
                 p3 = s.mesh.nodes[nodes[3]];
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const int samples = 400000;
      double first = 0.0;
      for (int k = 0; k < samples; ++k) {
        std::array<double, 3> t = {u(rng), u(rng), u(rng)};
        std::sort(t.begin(), t.end());
        const Vec3 x = t[0] * p0 + (t[1] - t[0]) * p1 + (t[2] - t[1]) * p2 + (1.0 - t[2]) * p3;
        first += gradient(x).squaredNorm();
      }
      first /= samples;
      const double vol = op.volume;
      // One term per multi-index: d_xx, d_yy, d_zz, d_xy, d_yz, d_xz.
      const double second =
          (4 * (a[3] * a[3] + a[4] * a[4] + a[5] * a[5]) + a[6] * a[6] + a[7] * a[7] + a[8] * a[8]) / (r2 * r2);
      const double want = std::pow(vol, 2.0 / 3.0) * first + std::pow(vol, 4.0 / 3.0) * second;
      CHECK(smoothness_quadratic(a, op) == doctest::Approx(want).epsilon(1e-3));
    }
  }
}

TEST_CASE("sub-stencil patterns") {
  SUBCASE("Cartesian hexahedra use the eight octants") {
    const Setup s(make_hex_box(3, 3, 3, Vec3(1.0, 1.0, 1.0), false));
    const auto& op = s.ops[13];
    REQUIRE(op.subs.size() == 8);
    std::set<std::array<int, 3>> octants;
    for (const auto& sub : op.subs) {
      REQUIRE(sub.size() == 3);
      std::array<int, 3> sign{};
      for (int id : sub) {
        const Vec3 d = extended_centroid(s.tables, s.mesh, id) - op.center;
        int axis;
        d.cwiseAbs().maxCoeff(&axis);
        CHECK(sign[axis] == 0);
        sign[axis] = d[axis] > 0 ? 1 : -1;
      }
      octants.insert(sign);
    }
    CHECK(octants.size() == 8);
  }
  SUBCASE("tetrahedra use four sub-stencils of face and second neighbours") {
    const Setup s(make_periodic_box(3));
    for (const auto& op : s.ops) {
      REQUIRE(op.subs.size() == 4);
      for (const auto& sub : op.subs) CHECK(sub.size() == 6);
      CHECK(op.linearWeights[0] == doctest::Approx(0.9));
      CHECK(op.big.size() >= static_cast<std::size_t>(kNumBasis));
    }
  }
}

TEST_CASE("missing stencil data is reported") {
  const Mesh mesh = compute_geometry(make_periodic_box(2));
  const Connectivity tables = build_connectivity(mesh);
  CHECK_THROWS_AS(select_stencils(tables, mesh, 0), StencilError);
}

TEST_CASE("single precision plan stays close to double") {
  const Setup s(make_periodic_box(3));
  const ReconstructionPlan<double> plan64(s.ops);
  const ReconstructionPlan<float> plan32(s.ops);
  const auto fields = s.averages([](const Vec3& x) { return 1.0 + 0.1 * std::sin(x.x() + 2 * x.y()); });
  std::vector<State<float>> fields32(fields.size());
  for (std::size_t c = 0; c < fields.size(); ++c)
    for (int v = 0; v < kNumVars; ++v) fields32[c][v] = static_cast<float>(fields[c][v]);
  CellPolynomial<double> w64, s64;
  CellPolynomial<float> w32, s32;
  for (std::size_t i = 0; i < plan64.size(); ++i) {
    plan64.reconstruct(i, fields, w64, s64);
    plan32.reconstruct(i, fields32, w32, s32);
    const Vec3 x = s.mesh.faces[s.mesh.cellFaces[i][0]].centroid;
    const auto p64 = plan64.evaluate(i, w64, arr(x));
    const auto p32 = plan32.evaluate(i, w32, {float(x.x()), float(x.y()), float(x.z())});
    CHECK(std::abs(p64.value[0] - p32.value[0]) < 1e-4);
  }
}
