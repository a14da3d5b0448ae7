#pragma once

#include "kinflow/state.hpp"

#include <array>
#include <cmath>

namespace kinflow {

/// No-slip adiabatic wall: velocity reversed, density and energy copied.
template <class Real>
State<Real> wall_ghost(const State<Real>& q) {
  return {q[0], -q[1], -q[2], -q[3], q[4]};
}

/// Free-stream state in working precision with cached derived quantities.
template <class Real>
struct FarfieldReference {
  State<Real> conservative{};
  std::array<Real, 3> velocity{};
  Real soundSpeed = 1;
  Real entropy = 1;  // p / rho^gamma
  Real gamma = Real(1.4);

  FarfieldReference() = default;
  FarfieldReference(const Primitive& free, double gammaIn)
      : conservative(to_conservative<Real>(free, gammaIn)),
        velocity{static_cast<Real>(free.u), static_cast<Real>(free.v), static_cast<Real>(free.w)},
        soundSpeed(static_cast<Real>(sound_speed(free, gammaIn))),
        entropy(static_cast<Real>(free.p / std::pow(free.rho, gammaIn))),
        gamma(static_cast<Real>(gammaIn)) {}
};

/// Far-field boundary state from the one-dimensional Riemann invariants along
/// the outward normal n: the outgoing invariant comes from the interior, the
/// incoming one from the free stream, and entropy and tangential velocity
/// from the upwind side. Supersonic inflow returns the free stream and
/// supersonic outflow the interior state.
template <class Real>
State<Real> farfield_ghost(const State<Real>& interior, const FarfieldReference<Real>& ref,
                           const std::array<Real, 3>& n) {
  const Real g = ref.gamma;
  const Real rho = interior[0];
  const std::array<Real, 3> u = {interior[1] / rho, interior[2] / rho, interior[3] / rho};
  const Real p = pressure(interior, g);
  const Real c = std::sqrt(g * p / rho);
  const Real unInterior = u[0] * n[0] + u[1] * n[1] + u[2] * n[2];
  const Real unFree = ref.velocity[0] * n[0] + ref.velocity[1] * n[1] + ref.velocity[2] * n[2];

  if (unInterior >= c) return interior;
  if (unFree <= -ref.soundSpeed) return ref.conservative;

  const Real outgoing = unInterior + Real(2) * c / (g - Real(1));
  const Real incoming = unFree - Real(2) * ref.soundSpeed / (g - Real(1));
  const Real un = Real(0.5) * (outgoing + incoming);
  const Real cb = Real(0.25) * (g - Real(1)) * (outgoing - incoming);

  const bool outflow = un >= Real(0);
  const Real entropy = outflow ? p / std::pow(rho, g) : ref.entropy;
  const std::array<Real, 3>& upwind = outflow ? u : ref.velocity;
  const Real upwindNormal = outflow ? unInterior : unFree;

  const Real rhoB = std::pow(cb * cb / (g * entropy), Real(1) / (g - Real(1)));
  const Real pB = rhoB * cb * cb / g;
  std::array<Real, 3> vel;
  for (int k = 0; k < 3; ++k) vel[k] = upwind[k] + (un - upwindNormal) * n[k];
  const Real kinetic = Real(0.5) * rhoB * (vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2]);
  return {rhoB, rhoB * vel[0], rhoB * vel[1], rhoB * vel[2], pB / (g - Real(1)) + kinetic};
}

}  // namespace kinflow
