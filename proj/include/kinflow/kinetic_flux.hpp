#pragma once

#include "kinflow/error.hpp"
#include "kinflow/state.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace kinflow {

/// Parameters of a Maxwellian: density, velocity and inverse temperature.
template <class Real>
struct Maxwellian {
  Real rho;
  Real u;
  Real v;
  Real w;
  Real lambda;
};

/// lambda = (K+3) rho / (4 (rho E - rho |U|^2 / 2)).
template <class Real>
Maxwellian<Real> maxwellian_from_state(const State<Real>& q, Real internalDof) {
  Maxwellian<Real> m;
  m.rho = q[0];
  if (!(m.rho > Real(0))) throw StateError("non-positive density in Maxwellian");
  m.u = q[1] / m.rho;
  m.v = q[2] / m.rho;
  m.w = q[3] / m.rho;
  const Real internal = q[4] - Real(0.5) * m.rho * (m.u * m.u + m.v * m.v + m.w * m.w);
  if (!(internal > Real(0))) throw StateError("non-positive temperature in Maxwellian");
  m.lambda = (internalDof + Real(3)) * m.rho / (Real(4) * internal);
  return m;
}

/// Normalised velocity moments <u^n>, <v^n>, <w^n> (n <= 6) and <xi^2>,
/// <xi^4>. The u moments may be full or restricted to u > 0 / u < 0.
template <class Real>
struct MomentTable {
  std::array<Real, 7> u{};
  std::array<Real, 7> v{};
  std::array<Real, 7> w{};
  Real xi2 = 0;
  Real xi4 = 0;
};

enum class VelocityRange { Full, Positive, Negative };

namespace detail {

template <class Real>
void recurse(std::array<Real, 7>& m, Real mean, Real lambda) {
  const Real inv = Real(1) / (Real(2) * lambda);
  for (int n = 0; n + 2 < 7; ++n) m[n + 2] = mean * m[n + 1] + Real(n + 1) * inv * m[n];
}

}  // namespace detail

template <class Real>
MomentTable<Real> moment_table(const Maxwellian<Real>& g, Real internalDof,
                               VelocityRange range = VelocityRange::Full) {
  MomentTable<Real> t;
  t.v[0] = 1;
  t.v[1] = g.v;
  detail::recurse(t.v, g.v, g.lambda);
  t.w[0] = 1;
  t.w[1] = g.w;
  detail::recurse(t.w, g.w, g.lambda);
  if (range == VelocityRange::Full) {
    t.u[0] = 1;
    t.u[1] = g.u;
  } else {
    const Real sl = std::sqrt(g.lambda);
    const Real tail = Real(0.5) * std::exp(-g.lambda * g.u * g.u) / std::sqrt(std::numbers::pi_v<Real> * g.lambda);
    if (range == VelocityRange::Positive) {
      t.u[0] = Real(0.5) * std::erfc(-sl * g.u);
      t.u[1] = g.u * t.u[0] + tail;
    } else {
      t.u[0] = Real(0.5) * std::erfc(sl * g.u);
      t.u[1] = g.u * t.u[0] - tail;
    }
  }
  detail::recurse(t.u, g.u, g.lambda);
  t.xi2 = internalDof / (Real(2) * g.lambda);
  t.xi4 = (internalDof * internalDof + Real(2) * internalDof) / (Real(4) * g.lambda * g.lambda);
  return t;
}

/// <u^a v^b w^c psi>.
template <class Real>
State<Real> moment_psi(const MomentTable<Real>& t, int a, int b, int c) {
  const Real m = t.u[a] * t.v[b] * t.w[c];
  return {m, t.u[a + 1] * t.v[b] * t.w[c], t.u[a] * t.v[b + 1] * t.w[c], t.u[a] * t.v[b] * t.w[c + 1],
          Real(0.5) * (t.u[a + 2] * t.v[b] * t.w[c] + t.u[a] * t.v[b + 2] * t.w[c] +
                       t.u[a] * t.v[b] * t.w[c + 2] + m * t.xi2)};
}

/// <u^a v^b w^c xi^2 psi>.
template <class Real>
State<Real> moment_psi_xi2(const MomentTable<Real>& t, int a, int b, int c) {
  const Real m = t.u[a] * t.v[b] * t.w[c];
  return {m * t.xi2, t.u[a + 1] * t.v[b] * t.w[c] * t.xi2, t.u[a] * t.v[b + 1] * t.w[c] * t.xi2,
          t.u[a] * t.v[b] * t.w[c + 1] * t.xi2,
          Real(0.5) * ((t.u[a + 2] * t.v[b] * t.w[c] + t.u[a] * t.v[b + 2] * t.w[c] +
                        t.u[a] * t.v[b] * t.w[c + 2]) * t.xi2 + m * t.xi4)};
}

/// <(coeffs . psi) u^a v^b w^c psi>.
template <class Real>
State<Real> moment_a_psi(const MomentTable<Real>& t, const State<Real>& k, int a, int b, int c) {
  const State<Real> m0 = moment_psi(t, a, b, c);
  const State<Real> mu = moment_psi(t, a + 1, b, c);
  const State<Real> mv = moment_psi(t, a, b + 1, c);
  const State<Real> mw = moment_psi(t, a, b, c + 1);
  const State<Real> muu = moment_psi(t, a + 2, b, c);
  const State<Real> mvv = moment_psi(t, a, b + 2, c);
  const State<Real> mww = moment_psi(t, a, b, c + 2);
  const State<Real> mxi = moment_psi_xi2(t, a, b, c);
  State<Real> out;
  for (int i = 0; i < kNumVars; ++i)
    out[i] = k[0] * m0[i] + k[1] * mu[i] + k[2] * mv[i] + k[3] * mw[i] +
             Real(0.5) * k[4] * (muu[i] + mvv[i] + mww[i] + mxi[i]);
  return out;
}

/// Solves <psi_i psi_j> a = rhs for the expansion coefficients a (rhs is a
/// derivative of the conservative state divided by density).
template <class Real>
State<Real> micro_slope(const Maxwellian<Real>& g, const State<Real>& rhs, Real internalDof) {
  const Real q2 = g.u * g.u + g.v * g.v + g.w * g.w;
  const Real thermal = (internalDof + Real(3)) / (Real(2) * g.lambda);
  const Real r1 = rhs[1] - g.u * rhs[0];
  const Real r2 = rhs[2] - g.v * rhs[0];
  const Real r3 = rhs[3] - g.w * rhs[0];
  const Real r4 = Real(2) * rhs[4] - (q2 + thermal) * rhs[0];
  State<Real> a;
  a[4] = Real(4) * g.lambda * g.lambda / (internalDof + Real(3)) *
         (r4 - Real(2) * g.u * r1 - Real(2) * g.v * r2 - Real(2) * g.w * r3);
  a[3] = Real(2) * g.lambda * r3 - g.w * a[4];
  a[2] = Real(2) * g.lambda * r2 - g.v * a[4];
  a[1] = Real(2) * g.lambda * r1 - g.u * a[4];
  a[0] = rhs[0] - g.u * a[1] - g.v * a[2] - g.w * a[3] - Real(0.5) * a[4] * (q2 + thermal);
  return a;
}

/// Temporal slope A from the compatibility condition <a1 u + a2 v + a3 w + A> = 0.
template <class Real>
State<Real> temporal_slope(const Maxwellian<Real>& g, const MomentTable<Real>& full,
                           const std::array<State<Real>, 3>& spatial, Real internalDof) {
  const State<Real> mu = moment_a_psi(full, spatial[0], 1, 0, 0);
  const State<Real> mv = moment_a_psi(full, spatial[1], 0, 1, 0);
  const State<Real> mw = moment_a_psi(full, spatial[2], 0, 0, 1);
  State<Real> rhs;
  for (int i = 0; i < kNumVars; ++i) rhs[i] = -(mu[i] + mv[i] + mw[i]);
  return micro_slope(g, rhs, internalDof);
}

/// Integrals over [0, T] of the six time coefficients of the interface
/// distribution: equilibrium, equilibrium slope, equilibrium temporal slope,
/// initial state, initial slope, initial temporal slope.
template <class Real>
std::array<Real, 6> time_coefficients(Real T, Real tau) {
  if (tau <= Real(0)) return {T, 0, Real(0.5) * T * T, 0, 0, 0};
  const Real e = std::exp(-T / tau);
  const Real oneMinus = -std::expm1(-T / tau);
  const Real t2 = tau * tau * oneMinus;
  return {T - tau * oneMinus,
          Real(2) * t2 - tau * T * e - tau * T,
          Real(0.5) * T * T - tau * T + t2,
          tau * oneMinus,
          -Real(2) * t2 + tau * T * e,
          -t2};
}

/// Reconstructed data on one side of an interface, in the local frame
/// (normal, t1, t2): value and derivatives along the three frame directions.
template <class Real>
struct SideState {
  State<Real> value{};
  std::array<State<Real>, 3> derivative{};
};

template <class Real>
struct FluxPair {
  State<Real> half{};  // integral over [0, dt/2]
  State<Real> full{};  // integral over [0, dt]
};

/// Collision time tau = mu(T0)/p0 + c1 |pl - pr| / (pl + pr) dt, where mu
/// follows a power law in temperature (T = p / rho). A non-negative
/// `fixedTau` replaces the formula.
template <class Real>
struct CollisionModel {
  Real referenceViscosity = 0;
  Real referenceTemperature = 1;
  Real exponent = Real(0.7);
  Real c1 = 0;
  Real fixedTau = -1;
};

/// Everything needed to evaluate the interface distribution at one point.
template <class Real>
struct FluxInput {
  SideState<Real> left;
  SideState<Real> right;
  /// Derivatives of the equilibrium state along the frame directions.
  std::array<State<Real>, 3> centralDerivative{};
  Real dt = 0;
};

template <class Real>
Real collision_time(const CollisionModel<Real>& model, const Maxwellian<Real>& g0, Real pl, Real pr,
                    Real dt) {
  if (model.fixedTau >= Real(0)) return model.fixedTau;
  Real tau = 0;
  if (model.referenceViscosity > Real(0)) {
    const Real temperature = Real(1) / (Real(2) * g0.lambda);
    const Real p0 = g0.rho * temperature;
    tau += model.referenceViscosity * std::pow(temperature / model.referenceTemperature, model.exponent) / p0;
  }
  if (model.c1 > Real(0)) tau += model.c1 * std::abs(pl - pr) / (pl + pr) * dt;
  return tau;
}

/// Exact Euler flux along the normal of the frame (global components).
template <class Real>
State<Real> euler_flux(const State<Real>& q, const std::array<Real, 3>& n, Real gamma) {
  const Real un = (q[1] * n[0] + q[2] * n[1] + q[3] * n[2]) / q[0];
  const Real p = pressure(q, gamma);
  return {q[0] * un, q[1] * un + p * n[0], q[2] * un + p * n[1], q[3] * un + p * n[2], (q[4] + p) * un};
}

/// Change of the Euler flux along local axis `axis` for a change dq of the
/// state q (flux Jacobian times dq).
template <class Real>
State<Real> euler_flux_change(const State<Real>& q, const State<Real>& dq, int axis, Real gamma) {
  const Real inv = Real(1) / q[0];
  const std::array<Real, 3> u = {q[1] * inv, q[2] * inv, q[3] * inv};
  const Real ud = u[axis];
  const Real dud = (dq[1 + axis] - ud * dq[0]) * inv;
  const Real dp = (gamma - Real(1)) *
                  (dq[4] - u[0] * dq[1] - u[1] * dq[2] - u[2] * dq[3] +
                   Real(0.5) * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) * dq[0]);
  State<Real> out;
  out[0] = dq[1 + axis];
  for (int j = 0; j < 3; ++j) out[1 + j] = dq[1 + j] * ud + q[1 + j] * dud;
  out[1 + axis] += dp;
  out[4] = (dq[4] + dp) * ud + (q[4] + pressure(q, gamma)) * dud;
  return out;
}

/// Equilibrium-only interface flux, the tau = 0 limit. Taking moments of
/// g0 (1 + A t) reduces to the Euler flux of q0 plus t times its change
/// along the compatible time derivative q_t = -sum_d dF_d/dq . dq0/dx_d.
template <class Real>
FluxPair<Real> equilibrium_flux(const State<Real>& q0, const std::array<State<Real>, 3>& derivative, Real dt,
                                Real gamma) {
  State<Real> qt{};
  for (int d = 0; d < 3; ++d) {
    const State<Real> change = euler_flux_change(q0, derivative[d], d, gamma);
    for (int i = 0; i < kNumVars; ++i) qt[i] -= change[i];
  }
  const State<Real> flux = euler_flux(q0, std::array<Real, 3>{1, 0, 0}, gamma);
  const State<Real> fluxRate = euler_flux_change(q0, qt, 0, gamma);
  const Real half = Real(0.5) * dt;
  FluxPair<Real> out;
  for (int i = 0; i < kNumVars; ++i) {
    out.half[i] = half * flux[i] + Real(0.5) * half * half * fluxRate[i];
    out.full[i] = dt * flux[i] + Real(0.5) * dt * dt * fluxRate[i];
  }
  return out;
}

/// Time integrated kinetic flux in the local frame over [0, dt/2] and [0, dt].
/// With tau = 0 only the equilibrium part survives and the initial-state
/// slopes are not needed.
template <class Real>
FluxPair<Real> interface_flux(const FluxInput<Real>& in, const CollisionModel<Real>& model, Real internalDof) {
  const Maxwellian<Real> gl = maxwellian_from_state(in.left.value, internalDof);
  const Maxwellian<Real> gr = maxwellian_from_state(in.right.value, internalDof);
  const MomentTable<Real> tl = moment_table(gl, internalDof, VelocityRange::Positive);
  const MomentTable<Real> tr = moment_table(gr, internalDof, VelocityRange::Negative);

  const State<Real> ml = moment_psi(tl, 0, 0, 0);
  const State<Real> mr = moment_psi(tr, 0, 0, 0);
  State<Real> q0;
  for (int i = 0; i < kNumVars; ++i) q0[i] = gl.rho * ml[i] + gr.rho * mr[i];

  const Maxwellian<Real> g0 = maxwellian_from_state(q0, internalDof);
  const Real tau = collision_time(model, g0, gl.rho / (Real(2) * gl.lambda), gr.rho / (Real(2) * gr.lambda), in.dt);
  if (tau <= Real(0))
    return equilibrium_flux(q0, in.centralDerivative, in.dt, (internalDof + Real(5)) / (internalDof + Real(3)));

  const MomentTable<Real> t0 = moment_table(g0, internalDof);
  std::array<State<Real>, 3> a0;
  for (int d = 0; d < 3; ++d) {
    State<Real> rhs;
    for (int i = 0; i < kNumVars; ++i) rhs[i] = in.centralDerivative[d][i] / g0.rho;
    a0[d] = micro_slope(g0, rhs, internalDof);
  }
  const State<Real> A0 = temporal_slope(g0, t0, a0, internalDof);
  const State<Real> eq = moment_psi(t0, 1, 0, 0);
  const State<Real> eqTime = moment_a_psi(t0, A0, 1, 0, 0);

  const auto cHalf = time_coefficients(Real(0.5) * in.dt, tau);
  const auto cFull = time_coefficients(in.dt, tau);
  FluxPair<Real> out;

  State<Real> eqSpace;
  {
    const State<Real> x = moment_a_psi(t0, a0[0], 2, 0, 0);
    const State<Real> y = moment_a_psi(t0, a0[1], 1, 1, 0);
    const State<Real> z = moment_a_psi(t0, a0[2], 1, 0, 1);
    for (int i = 0; i < kNumVars; ++i) eqSpace[i] = x[i] + y[i] + z[i];
  }

  // Initial (non-equilibrium) parts from each side.
  auto side_terms = [&](const SideState<Real>& s, const Maxwellian<Real>& g, const MomentTable<Real>& half,
                        std::array<State<Real>, 3>& terms) {
    const MomentTable<Real> full = moment_table(g, internalDof);
    std::array<State<Real>, 3> a;
    for (int d = 0; d < 3; ++d) {
      State<Real> rhs;
      for (int i = 0; i < kNumVars; ++i) rhs[i] = s.derivative[d][i] / g.rho;
      a[d] = micro_slope(g, rhs, internalDof);
    }
    const State<Real> A = temporal_slope(g, full, a, internalDof);
    terms[0] = moment_psi(half, 1, 0, 0);
    const State<Real> x = moment_a_psi(half, a[0], 2, 0, 0);
    const State<Real> y = moment_a_psi(half, a[1], 1, 1, 0);
    const State<Real> z = moment_a_psi(half, a[2], 1, 0, 1);
    for (int i = 0; i < kNumVars; ++i) terms[1][i] = x[i] + y[i] + z[i];
    terms[2] = moment_a_psi(half, A, 1, 0, 0);
  };
  std::array<State<Real>, 3> left, right;
  side_terms(in.left, gl, tl, left);
  side_terms(in.right, gr, tr, right);

  auto combine = [&](const std::array<Real, 6>& c, State<Real>& f) {
    for (int i = 0; i < kNumVars; ++i) {
      f[i] = g0.rho * (c[0] * eq[i] + c[1] * eqSpace[i] + c[2] * eqTime[i]) +
             gl.rho * (c[3] * left[0][i] + c[4] * left[1][i] + c[5] * left[2][i]) +
             gr.rho * (c[3] * right[0][i] + c[4] * right[1][i] + c[5] * right[2][i]);
    }
  };
  combine(cHalf, out.half);
  combine(cFull, out.full);
  return out;
}

/// Local frame (normal, t1, t2) helpers.
template <class Real>
struct Frame {
  std::array<Real, 3> n;
  std::array<Real, 3> t1;
  std::array<Real, 3> t2;

  State<Real> to_local(const State<Real>& q) const {
    return {q[0], q[1] * n[0] + q[2] * n[1] + q[3] * n[2], q[1] * t1[0] + q[2] * t1[1] + q[3] * t1[2],
            q[1] * t2[0] + q[2] * t2[1] + q[3] * t2[2], q[4]};
  }
  State<Real> to_global(const State<Real>& q) const {
    return {q[0], q[1] * n[0] + q[2] * t1[0] + q[3] * t2[0], q[1] * n[1] + q[2] * t1[1] + q[3] * t2[1],
            q[1] * n[2] + q[2] * t1[2] + q[3] * t2[2], q[4]};
  }
  /// Directional derivatives along n, t1, t2 of a global gradient, with the
  /// momentum components rotated into the frame.
  std::array<State<Real>, 3> derivatives(const std::array<State<Real>, 3>& grad) const {
    std::array<State<Real>, 3> out;
    const std::array<const std::array<Real, 3>*, 3> dirs = {&n, &t1, &t2};
    for (int d = 0; d < 3; ++d) {
      const auto& e = *dirs[d];
      State<Real> g;
      for (int i = 0; i < kNumVars; ++i) g[i] = grad[0][i] * e[0] + grad[1][i] * e[1] + grad[2][i] * e[2];
      out[d] = to_local(g);
    }
    return out;
  }
};


}  // namespace kinflow
