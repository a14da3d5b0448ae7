#pragma once

#include "kinflow/mesh.hpp"
#include "kinflow/state.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace kinflow {

using ScalarField = std::function<double(const Vec3&)>;

/// Cell average of f by tensor Gauss-Legendre quadrature with the given
/// points per axis (collapsed coordinates on tetrahedra, the trilinear map
/// on hexahedra).
double cell_average(const Mesh& mesh, int cell, const ScalarField& f, int pointsPerAxis = 5);

/// Density of the periodic advection problem: 1 + 0.2 sin(pi (x + y + z - 3t))
/// for unit velocity along every axis.
double advection_density(const Vec3& x, double t);

/// Exact cell averages of the advected density at time t.
std::vector<double> advection_exact_averages(const Mesh& mesh, double t);

/// Initial conservative cell averages of the advection problem.
std::vector<State<double>> advection_initial_state(const Mesh& mesh, double gamma);

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// Volume-weighted density error norms against exact cell averages.
ErrorNorms density_error(const Mesh& mesh, std::span<const State<double>> fields, std::span<const double> exact);

/// Volume integrals of the conservative variables.
State<double> conserved_totals(const Mesh& mesh, std::span<const State<double>> fields);

/// Largest relative change of a conserved total.
double conservation_drift(const State<double>& before, const State<double>& after);

struct WakeMetrics {
  /// Closed wake length over diameter, measured from the rear stagnation point.
  std::optional<double> length;
  /// Separation angle in degrees from the front stagnation point.
  std::optional<double> separationDeg;
};

/// Wake metrics of a sphere of the given diameter centred at the origin in a
/// stream along +x. Axial velocity is sampled at centroids of cells within
/// max(0.05 D, 0.75 |cell|^(1/3)) of the downstream axis; tangential velocity
/// of wall-adjacent cells is averaged over azimuth in 5-degree polar bins.
WakeMetrics wake_metrics(const Mesh& mesh, std::span<const State<double>> fields, double diameter,
                         const std::string& wallTag = "wall");

}  // namespace kinflow
