#pragma once

#include "kinflow/connectivity.hpp"
#include "kinflow/mesh.hpp"
#include "kinflow/state.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace kinflow {

inline constexpr int kNumBasis = 9;
inline constexpr int kNumLinear = 3;
inline constexpr double kSubStencilWeight = 0.025;

/// Exponents of the quadratic basis in storage order.
inline constexpr std::array<std::array<int, 3>, kNumBasis> kBasisExponents = {{
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}}};

struct StencilSet {
  /// Big stencil without the target cell itself.
  std::vector<int> big;
  /// Sub-stencils without the target cell itself.
  std::vector<std::vector<int>> subs;
  std::vector<double> linearWeights;  // gamma_0 .. gamma_M
};

/// Local face positions of a hexahedron in canonical 1..6 label order:
/// result[0] and result[5] are the most opposed pair, result[1..4] the ring.
std::array<int, 6> hex_face_order(std::span<const Vec3> neighborCentroids, const Vec3& center);

StencilSet select_stencils(const Connectivity& tables, const Mesh& mesh, int cell);

/// First and second raw moments of every physical cell (centroid, covariance).
struct CellMoments {
  std::vector<Eigen::Matrix3d> covariance;
  static CellMoments compute(const Mesh& mesh);
};

/// Geometry-only least-squares operator for one target cell. Cell ids are
/// extended ids in whatever index space the owner uses.
struct ReconstructionOperator {
  int cell = kNoCell;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double volume = 1.0;
  std::array<double, kNumBasis> basisMean{};
  /// Mean of xi and xi*xi^T over the target cell (xi = (x - center)/radius).
  Vec3 firstMoment = Vec3::Zero();
  Eigen::Matrix3d secondMoment = Eigen::Matrix3d::Zero();
  std::vector<int> big;
  Eigen::MatrixXd bigPinv;  // kNumBasis x |big|
  std::vector<std::vector<int>> subs;
  std::vector<Eigen::MatrixXd> subPinv;  // kNumLinear x |sub|
  std::vector<double> linearWeights;
};

ReconstructionOperator build_reconstruction_operator(const Mesh& mesh, const Connectivity& tables,
                                                     const CellMoments& moments, int cell,
                                                     const StencilSet& stencils);

/// Mean over extended cell `cell` of each monomial in the scaled coordinates
/// of a target with the given center and radius.
std::array<double, kNumBasis> scaled_monomial_means(const Mesh& mesh, const Connectivity& tables,
                                                    const CellMoments& moments, int cell,
                                                    const Vec3& center, double radius);

/// Epsilon guarding the non-linear weights.
template <class Real>
constexpr Real weno_epsilon() {
  return sizeof(Real) >= 8 ? Real(1e-10) : Real(1e-6);
}

/// Quadratic polynomial around a target, stored per conserved variable.
template <class Real>
struct CellPolynomial {
  State<Real> mean{};
  std::array<State<Real>, kNumBasis> coeffs{};
};

/// Reconstruction output at one point: value and gradient (global frame).
template <class Real>
struct PointState {
  State<Real> value{};
  std::array<State<Real>, 3> gradient{};
};

/// Smoothness indicators of a quadratic (9 coeffs) and a linear (3 coeffs)
/// polynomial given the target geometry.
double smoothness_quadratic(std::span<const double, kNumBasis> coeffs, const ReconstructionOperator& op);
double smoothness_linear(std::span<const double, kNumLinear> coeffs, const ReconstructionOperator& op);

/// Normalized non-linear weights from beta_0..beta_M and gamma_0..gamma_M.
template <class Real>
void weno_weights(std::span<const Real> beta, std::span<const Real> gamma, std::span<Real> out) {
  const std::size_t m = beta.size() - 1;
  Real tau = 0;
  for (std::size_t k = 1; k <= m; ++k) tau += std::abs(beta[0] - beta[k]);
  tau /= static_cast<Real>(m);
  Real sum = 0;
  for (std::size_t k = 0; k <= m; ++k) {
    out[k] = gamma[k] * (Real(1) + tau / (beta[k] + weno_epsilon<Real>()));
    sum += out[k];
  }
  for (std::size_t k = 0; k <= m; ++k) out[k] /= sum;
}

/// Coefficients of omega_0 / gamma_0 (P0 - sum_m gamma_m P_m) + sum_m omega_m P_m
/// for one variable; `linear[m]` holds the gradient coefficients of P_{m+1}.
template <class Real>
std::array<Real, kNumBasis> weno_combine(const std::array<Real, kNumBasis>& p0,
                                         std::span<const std::array<Real, kNumLinear>> linear,
                                         std::span<const Real> gamma, std::span<const Real> omega) {
  const Real scale0 = omega[0] / gamma[0];
  std::array<Real, kNumBasis> out;
  for (int r = kNumLinear; r < kNumBasis; ++r) out[r] = scale0 * p0[r];
  for (int r = 0; r < kNumLinear; ++r) {
    Real mixed = 0, blended = 0;
    for (std::size_t m = 0; m < linear.size(); ++m) {
      mixed += gamma[m + 1] * linear[m][r];
      blended += omega[m + 1] * linear[m][r];
    }
    out[r] = scale0 * (p0[r] - mixed) + blended;
  }
  return out;
}

/// Compact per-target data in the working precision, with flat stencil and
/// pseudo-inverse storage.
template <class Real>
class ReconstructionPlan {
 public:
  struct Target {
    int cell;
    int numSubs;
    std::array<Real, 3> center;
    Real invRadius;
    std::array<Real, kNumBasis> basisMean;
    Real firstScale;   // |Omega|^(2/3) / h^2
    Real secondScale;  // |Omega|^(4/3) / h^4
    std::array<Real, 3> firstMoment;
    std::array<Real, 6> secondMoment;  // xx, yy, zz, xy, yz, xz
    Real gamma0;
    Real gammaSub;
    int bigBegin;
    int bigCount;
    std::array<int, 9> subBegin;  // sub m occupies subIds_[subBegin[m], subBegin[m+1])
  };

  ReconstructionPlan() = default;
  explicit ReconstructionPlan(std::span<const ReconstructionOperator> ops);

  std::size_t size() const { return targets_.size(); }
  const Target& target(std::size_t i) const { return targets_[i]; }

  /// Fits P0 and the linear polynomials and combines them. `weno` receives
  /// the non-linear combination; `smooth` receives P0 (the linear-weight
  /// combination collapses to it).
  void reconstruct(std::size_t i, std::span<const State<Real>> fields, CellPolynomial<Real>& weno,
                   CellPolynomial<Real>& smooth) const;

  /// Value and gradient of a polynomial of target i at x.
  PointState<Real> evaluate(std::size_t i, const CellPolynomial<Real>& poly,
                            const std::array<Real, 3>& x) const;
  State<Real> value(std::size_t i, const CellPolynomial<Real>& poly, const std::array<Real, 3>& x) const;
  std::array<State<Real>, 3> gradient(std::size_t i, const CellPolynomial<Real>& poly,
                                      const std::array<Real, 3>& x) const;

 private:
  std::vector<Target> targets_;
  std::vector<int> bigIds_;
  std::vector<Real> bigCoef_;  // kNumBasis pseudo-inverse entries per big-stencil slot
  std::vector<int> subIds_;
  std::vector<Real> subCoef_;  // kNumLinear pseudo-inverse entries per sub-stencil slot
};

extern template class ReconstructionPlan<float>;
extern template class ReconstructionPlan<double>;

}  // namespace kinflow
