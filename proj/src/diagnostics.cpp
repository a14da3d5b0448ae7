#include "kinflow/diagnostics.hpp"

#include "kinflow/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace kinflow {

namespace {

struct Rule {
  std::vector<double> x;  // on [0, 1]
  std::vector<double> w;
};

Rule gauss_legendre_unit(int n) {
  static const std::array<std::vector<std::pair<double, double>>, 6> table = {{
      {},
      {{0.0, 2.0}},
      {{-0.5773502691896257, 1.0}, {0.5773502691896257, 1.0}},
      {{-0.7745966692414834, 0.5555555555555556}, {0.0, 0.8888888888888888}, {0.7745966692414834, 0.5555555555555556}},
      {{-0.8611363115940526, 0.3478548451374538},
       {-0.3399810435848563, 0.6521451548625461},
       {0.3399810435848563, 0.6521451548625461},
       {0.8611363115940526, 0.3478548451374538}},
      {{-0.9061798459386640, 0.2369268850561891},
       {-0.5384693101056831, 0.4786286704993665},
       {0.0, 0.5688888888888889},
       {0.5384693101056831, 0.4786286704993665},
       {0.9061798459386640, 0.2369268850561891}},
  }};
  if (n < 1 || n > 5) throw Error("quadrature supports 1 to 5 points per axis");
  Rule r;
  for (const auto& [x, w] : table[n]) {
    r.x.push_back(0.5 * (x + 1.0));
    r.w.push_back(0.5 * w);
  }
  return r;
}

}  // namespace

double cell_average(const Mesh& mesh, int cell, const ScalarField& f, int pointsPerAxis) {
  const Rule r = gauss_legendre_unit(pointsPerAxis);
  const Cell& c = mesh.cells[cell];
  double integral = 0.0, volume = 0.0;
  if (c.kind == CellKind::Tetrahedron) {
    const Vec3& v0 = mesh.nodes[c.nodes[0]];
    const Vec3 e1 = mesh.nodes[c.nodes[1]] - v0;
    const Vec3 e2 = mesh.nodes[c.nodes[2]] - v0;
    const Vec3 e3 = mesh.nodes[c.nodes[3]] - v0;
    const double jac = std::abs(e1.dot(e2.cross(e3)));
    for (std::size_t i = 0; i < r.x.size(); ++i)
      for (std::size_t j = 0; j < r.x.size(); ++j)
        for (std::size_t k = 0; k < r.x.size(); ++k) {
          const double a = r.x[i], b = r.x[j], g = r.x[k];
          const double l1 = a, l2 = b * (1.0 - a), l3 = g * (1.0 - a) * (1.0 - b);
          const double w = r.w[i] * r.w[j] * r.w[k] * (1.0 - a) * (1.0 - a) * (1.0 - b) * jac;
          integral += w * f(v0 + l1 * e1 + l2 * e2 + l3 * e3);
          volume += w;
        }
  } else {
    std::array<Vec3, 8> p;
    for (int k = 0; k < 8; ++k) p[k] = mesh.nodes[c.nodes[k]];
    for (std::size_t i = 0; i < r.x.size(); ++i)
      for (std::size_t j = 0; j < r.x.size(); ++j)
        for (std::size_t k = 0; k < r.x.size(); ++k) {
          const double s = r.x[i], t = r.x[j], u = r.x[k];
          const std::array<double, 8> shape = {(1 - s) * (1 - t) * (1 - u), s * (1 - t) * (1 - u), s * t * (1 - u),
                                               (1 - s) * t * (1 - u),       (1 - s) * (1 - t) * u, s * (1 - t) * u,
                                               s * t * u,                   (1 - s) * t * u};
          const std::array<double, 8> ds = {-(1 - t) * (1 - u), (1 - t) * (1 - u), t * (1 - u), -t * (1 - u),
                                            -(1 - t) * u,       (1 - t) * u,       t * u,       -t * u};
          const std::array<double, 8> dt = {-(1 - s) * (1 - u), -s * (1 - u), s * (1 - u), (1 - s) * (1 - u),
                                            -(1 - s) * u,       -s * u,       s * u,       (1 - s) * u};
          const std::array<double, 8> du = {-(1 - s) * (1 - t), -s * (1 - t), -s * t, -(1 - s) * t,
                                            (1 - s) * (1 - t),  s * (1 - t),  s * t,  (1 - s) * t};
          Vec3 x = Vec3::Zero(), xs = Vec3::Zero(), xt = Vec3::Zero(), xu = Vec3::Zero();
          for (int n = 0; n < 8; ++n) {
            x += shape[n] * p[n];
            xs += ds[n] * p[n];
            xt += dt[n] * p[n];
            xu += du[n] * p[n];
          }
          const double w = r.w[i] * r.w[j] * r.w[k] * std::abs(xs.dot(xt.cross(xu)));
          integral += w * f(x);
          volume += w;
        }
  }
  return integral / volume;
}

double advection_density(const Vec3& x, double t) {
  return 1.0 + 0.2 * std::sin(std::numbers::pi * (x.x() + x.y() + x.z() - 3.0 * t));
}

std::vector<double> advection_exact_averages(const Mesh& mesh, double t) {
  std::vector<double> out(mesh.cells.size());
  const ScalarField f = [t](const Vec3& x) { return advection_density(x, t); };
  for (int c = 0; c < mesh.num_cells(); ++c) out[c] = cell_average(mesh, c, f);
  return out;
}

std::vector<State<double>> advection_initial_state(const Mesh& mesh, double gamma) {
  // With unit velocity and unit pressure every conservative variable is an
  // affine function of density, so averages follow from the density average.
  const std::vector<double> rho = advection_exact_averages(mesh, 0.0);
  std::vector<State<double>> out(rho.size());
  for (std::size_t c = 0; c < rho.size(); ++c)
    out[c] = {rho[c], rho[c], rho[c], rho[c], 1.0 / (gamma - 1.0) + 1.5 * rho[c]};
  return out;
}

ErrorNorms density_error(const Mesh& mesh, std::span<const State<double>> fields, std::span<const double> exact) {
  if (fields.size() != exact.size() || fields.size() != mesh.cells.size())
    throw Error("error norm needs one value per cell");
  ErrorNorms e;
  double volume = 0.0;
  for (std::size_t c = 0; c < fields.size(); ++c) {
    const double vol = mesh.cells[c].volume;
    const double d = std::abs(fields[c][0] - exact[c]);
    e.l1 += d * vol;
    e.l2 += d * d * vol;
    e.linf = std::max(e.linf, d);
    volume += vol;
  }
  e.l1 /= volume;
  e.l2 = std::sqrt(e.l2 / volume);
  return e;
}

State<double> conserved_totals(const Mesh& mesh, std::span<const State<double>> fields) {
  State<double> total{};
  for (std::size_t c = 0; c < fields.size(); ++c)
    for (int v = 0; v < kNumVars; ++v) total[v] += fields[c][v] * mesh.cells[c].volume;
  return total;
}

double conservation_drift(const State<double>& before, const State<double>& after) {
  double scale = 0.0;
  for (int v = 0; v < kNumVars; ++v) scale = std::max(scale, std::abs(before[v]));
  double drift = 0.0;
  for (int v = 0; v < kNumVars; ++v) drift = std::max(drift, std::abs(after[v] - before[v]) / scale);
  return drift;
}

WakeMetrics wake_metrics(const Mesh& mesh, std::span<const State<double>> fields, double diameter,
                         const std::string& wallTag) {
  WakeMetrics out;
  const double radius = 0.5 * diameter;

  // Axial velocity along the downstream axis.
  std::vector<std::pair<double, double>> axis;  // (x, u)
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Vec3& x = mesh.cells[c].centroid;
    if (x.x() <= radius) continue;
    const double lateral = std::hypot(x.y(), x.z());
    const double tube = std::max(0.05 * diameter, 0.75 * std::cbrt(mesh.cells[c].volume));
    if (lateral <= tube) axis.emplace_back(x.x(), fields[c][1] / fields[c][0]);
  }
  std::sort(axis.begin(), axis.end());
  // Merge samples at the same axial station.
  std::vector<std::pair<double, double>> merged;
  for (std::size_t k = 0; k < axis.size();) {
    std::size_t j = k;
    double xs = 0.0, us = 0.0;
    while (j < axis.size() && axis[j].first - axis[k].first <= 1e-9 * diameter) {
      xs += axis[j].first;
      us += axis[j].second;
      ++j;
    }
    merged.emplace_back(xs / static_cast<double>(j - k), us / static_cast<double>(j - k));
    k = j;
  }
  if (!merged.empty() && merged.front().second < 0.0) {
    for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
      const auto [x0, u0] = merged[k];
      const auto [x1, u1] = merged[k + 1];
      if (u0 < 0.0 && u1 >= 0.0) {
        const double xs = x0 + (x1 - x0) * (-u0) / (u1 - u0);
        out.length = (xs - radius) / diameter;
        break;
      }
    }
  }

  // Tangential velocity of wall-adjacent cells, binned by polar angle.
  constexpr int kBins = 36;
  std::array<double, kBins> sumU{}, sumAngle{};
  std::array<int, kBins> count{};
  std::vector<char> isWall(mesh.cells.size(), 0);
  for (const Face& f : mesh.faces)
    if (f.cells.size() == 1 && f.tag == wallTag) isWall[f.cells[0]] = 1;
  const Vec3 front(-1.0, 0.0, 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (!isWall[c]) continue;
    const Vec3 r = mesh.cells[c].centroid.normalized();
    const double cosPhi = std::clamp(r.dot(front), -1.0, 1.0);
    const double phi = std::acos(cosPhi);
    const double sinPhi = std::sin(phi);
    if (sinPhi < 1e-12) continue;
    const Vec3 ePhi = (cosPhi * r - front) / sinPhi;
    const Vec3 u(fields[c][1] / fields[c][0], fields[c][2] / fields[c][0], fields[c][3] / fields[c][0]);
    const int bin = std::min(kBins - 1, static_cast<int>(phi / std::numbers::pi * kBins));
    sumU[bin] += u.dot(ePhi);
    sumAngle[bin] += phi;
    ++count[bin];
  }
  std::vector<std::pair<double, double>> profile;  // (angle, mean tangential velocity)
  for (int b = 0; b < kBins; ++b)
    if (count[b] > 0) profile.emplace_back(sumAngle[b] / count[b], sumU[b] / count[b]);
  for (std::size_t k = 0; k + 1 < profile.size(); ++k) {
    const auto [a0, u0] = profile[k];
    const auto [a1, u1] = profile[k + 1];
    if (u0 > 0.0 && u1 <= 0.0) {
      const double angle = a0 + (a1 - a0) * u0 / (u0 - u1);
      out.separationDeg = angle * 180.0 / std::numbers::pi;
      break;
    }
  }
  return out;
}

}  // namespace kinflow
