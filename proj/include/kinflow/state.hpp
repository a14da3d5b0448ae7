#pragma once

#include "kinflow/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace kinflow {

inline constexpr int kNumVars = 5;

/// Conservative state (rho, rho*U, rho*V, rho*W, rho*E).
template <class Real>
using State = std::array<Real, kNumVars>;

struct GasModel {
  double gamma = 1.4;
  double prandtl = 1.0;
  /// Power-law viscosity mu = referenceViscosity * (T / referenceTemperature)^exponent.
  double referenceViscosity = 0.0;
  double referenceTemperature = 1.0;
  double viscosityExponent = 0.7;

  /// Internal degrees of freedom, (5 - 3 gamma) / (gamma - 1).
  double internal_dof() const { return (5.0 - 3.0 * gamma) / (gamma - 1.0); }
  bool viscous() const { return referenceViscosity > 0.0; }

  void validate() const {
    if (!(gamma > 1.0 && gamma <= 5.0 / 3.0 + 1e-12))
      throw ConfigError("gamma must lie in (1, 5/3], got " + std::to_string(gamma));
  }
};

struct Primitive {
  double rho = 1.0;
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double p = 1.0;
};

template <class Real>
State<Real> to_conservative(const Primitive& q, double gamma) {
  const double kinetic = 0.5 * q.rho * (q.u * q.u + q.v * q.v + q.w * q.w);
  return {static_cast<Real>(q.rho), static_cast<Real>(q.rho * q.u), static_cast<Real>(q.rho * q.v),
          static_cast<Real>(q.rho * q.w), static_cast<Real>(q.p / (gamma - 1.0) + kinetic)};
}

template <class Real>
Primitive to_primitive(const State<Real>& s, double gamma) {
  Primitive q;
  q.rho = s[0];
  q.u = s[1] / q.rho;
  q.v = s[2] / q.rho;
  q.w = s[3] / q.rho;
  q.p = (gamma - 1.0) * (s[4] - 0.5 * q.rho * (q.u * q.u + q.v * q.v + q.w * q.w));
  return q;
}

template <class Real>
Real pressure(const State<Real>& s, Real gamma) {
  return (gamma - Real(1)) * (s[4] - Real(0.5) * (s[1] * s[1] + s[2] * s[2] + s[3] * s[3]) / s[0]);
}

inline double sound_speed(const Primitive& q, double gamma) { return std::sqrt(gamma * q.p / q.rho); }

/// Temperature in units where T = p / rho.
inline double temperature(const Primitive& q) { return q.p / q.rho; }

}  // namespace kinflow
