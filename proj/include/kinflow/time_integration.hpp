#pragma once

#include "kinflow/error.hpp"
#include "kinflow/mesh.hpp"
#include "kinflow/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace kinflow {

/// Linear-in-time flux F(t) = value + slope * t.
template <class Real>
struct FluxFit {
  State<Real> value{};
  State<Real> slope{};
};

/// Fits F(t) = F0 + t dF to the integrals over [0, dt/2] and [0, dt].
template <class Real>
FluxFit<Real> flux_time_coefficients(const State<Real>& half, const State<Real>& full, Real dt) {
  FluxFit<Real> fit;
  const Real inv = Real(1) / dt;
  for (int i = 0; i < kNumVars; ++i) {
    fit.value[i] = (Real(4) * half[i] - full[i]) * inv;
    fit.slope[i] = Real(4) * (full[i] - Real(2) * half[i]) * inv * inv;
  }
  return fit;
}

/// Per-cell gather list for the residual: L_i = sum_k coef[k] * flux[face[k]]
/// over k in [begin[i], begin[i+1]). The coefficient is -area/volume on the
/// side the face normal points away from and +area/volume on the other.
template <class Real>
struct ResidualStencil {
  std::vector<int> begin{0};
  std::vector<int> face;
  std::vector<Real> coef;

  std::size_t num_cells() const { return begin.size() - 1; }
  void add(int f, Real c) {
    face.push_back(f);
    coef.push_back(c);
  }
  void close_cell() { begin.push_back(static_cast<int>(face.size())); }
};

/// L and dL/dt of every cell from the fitted face fluxes. `computed` flags the
/// faces whose flux is current; a stencil that references any other face is
/// an assembly error.
template <class Real>
void assemble_residual(const ResidualStencil<Real>& stencil, std::span<const FluxFit<Real>> fits,
                       std::span<const unsigned char> computed, std::span<State<Real>> residual,
                       std::span<State<Real>> slope) {
  const std::size_t n = stencil.num_cells();
  for (std::size_t c = 0; c < n; ++c) {
    State<Real> l{}, dl{};
    for (int k = stencil.begin[c]; k < stencil.begin[c + 1]; ++k) {
      const int f = stencil.face[k];
      if (f < 0 || static_cast<std::size_t>(f) >= fits.size() || !computed[f])
        throw AssemblyError("cell " + std::to_string(c) + " needs flux of face " + std::to_string(f) +
                            " which was not computed");
      const Real w = stencil.coef[k];
      for (int v = 0; v < kNumVars; ++v) {
        l[v] += w * fits[f].value[v];
        dl[v] += w * fits[f].slope[v];
      }
    }
    residual[c] = l;
    slope[c] = dl;
  }
}

/// Q* = Qn + dt/2 L(Qn) + dt^2/8 dL(Qn).
template <class Real>
void predictor_update(std::span<const State<Real>> qn, std::span<const State<Real>> l,
                      std::span<const State<Real>> dl, Real dt, std::span<State<Real>> out) {
  const Real a = Real(0.5) * dt;
  const Real b = dt * dt / Real(8);
  for (std::size_t c = 0; c < qn.size(); ++c)
    for (int v = 0; v < kNumVars; ++v) out[c][v] = qn[c][v] + a * l[c][v] + b * dl[c][v];
}

/// Qn+1 = Qn + dt L(Qn) + dt^2/6 (dL(Qn) + 2 dL(Q*)).
template <class Real>
void corrector_update(std::span<const State<Real>> qn, std::span<const State<Real>> l,
                      std::span<const State<Real>> dln, std::span<const State<Real>> dlStar, Real dt,
                      std::span<State<Real>> out) {
  const Real b = dt * dt / Real(6);
  for (std::size_t c = 0; c < qn.size(); ++c)
    for (int v = 0; v < kNumVars; ++v)
      out[c][v] = qn[c][v] + dt * l[c][v] + b * (dln[c][v] + Real(2) * dlStar[c][v]);
}

/// Throws PositivityError for the first cell with non-positive density or
/// pressure. `globalIds` maps positions to reported cell ids (may be empty).
template <class Real>
void check_positivity(std::span<const State<Real>> q, Real gamma, std::span<const int> globalIds = {}) {
  for (std::size_t c = 0; c < q.size(); ++c) {
    const Real p = pressure(q[c], gamma);
    if (!(q[c][0] > Real(0)) || !(p > Real(0))) {
      const int id = globalIds.empty() ? static_cast<int>(c) : globalIds[c];
      throw PositivityError(id, q[c][0] > Real(0) ? "non-positive pressure" : "non-positive density");
    }
  }
}

/// Scratch fields for one two-stage step.
template <class Real>
struct StageState {
  std::vector<State<Real>> start;
  std::vector<State<Real>> residual;
  std::vector<State<Real>> slope;
  std::vector<State<Real>> residualStar;  // computed but unused by the update
  std::vector<State<Real>> slopeStar;

  void resize(std::size_t n) {
    start.resize(n);
    residual.resize(n);
    slope.resize(n);
    residualStar.resize(n);
    slopeStar.resize(n);
  }
};

/// One two-stage fourth-order step on `q` in place. `evaluate(stage, q, L, dL)`
/// computes the residual and its time derivative for the given fields
/// (stage 0 at t_n, stage 1 at the intermediate state).
template <class Real, class Evaluate>
void two_stage_step(std::span<State<Real>> q, Real dt, StageState<Real>& work, Evaluate&& evaluate) {
  work.resize(q.size());
  std::copy(q.begin(), q.end(), work.start.begin());
  evaluate(0, std::span<const State<Real>>(work.start), std::span<State<Real>>(work.residual),
           std::span<State<Real>>(work.slope));
  predictor_update<Real>(work.start, work.residual, work.slope, dt, q);
  evaluate(1, std::span<const State<Real>>(q.data(), q.size()), std::span<State<Real>>(work.residualStar),
           std::span<State<Real>>(work.slopeStar));
  corrector_update<Real>(work.start, work.residual, work.slope, work.slopeStar, dt, q);
}

/// Cell height proxy |Omega| / max face area.
std::vector<double> cell_heights(const Mesh& mesh);

/// CFL-limited step of the given cells: cfl * min d/(|U| + c + 2 nu/d).
template <class Real>
double local_time_step(std::span<const State<Real>> q, std::span<const double> height, const GasModel& gas,
                       double cfl) {
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < q.size(); ++c) {
    State<double> s;
    for (int v = 0; v < kNumVars; ++v) s[v] = static_cast<double>(q[c][v]);
    const Primitive w = to_primitive(s, gas.gamma);
    if (!(w.rho > 0.0) || !(w.p > 0.0)) throw StateError("non-positive state in cell " + std::to_string(c));
    const double speed = std::sqrt(w.u * w.u + w.v * w.v + w.w * w.w) + sound_speed(w, gas.gamma);
    double nu = 0.0;
    if (gas.viscous()) {
      const double mu = gas.referenceViscosity *
                        std::pow(temperature(w) / gas.referenceTemperature, gas.viscosityExponent);
      nu = mu / w.rho;
    }
    const double d = height[c];
    dt = std::min(dt, cfl * d / (speed + 2.0 * nu / d));
  }
  return dt;
}

/// Validates a (globally reduced) step.
inline double checked_time_step(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw StateError("invalid time step " + std::to_string(dt));
  return dt;
}

}  // namespace kinflow
