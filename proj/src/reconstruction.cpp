#include "kinflow/reconstruction.hpp"

#include "kinflow/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kinflow {

namespace {

// Tetrahedron sub-stencils: face-neighbour triples; sub m also takes the
// neighbours of neighbour m.
constexpr std::array<std::array<int, 3>, 4> kTetTriples = {{{0, 1, 2}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}}};

// Hexahedron sub-stencils in terms of the 1..6 labels (0-based here).
constexpr std::array<std::array<int, 3>, 8> kHexTriples = {
    {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}, {5, 1, 2}, {5, 2, 3}, {5, 3, 4}, {5, 4, 1}}};

template <class Real>
Real beta_quadratic(const std::array<Real, kNumBasis>& a, Real firstScale, Real secondScale,
                    const std::array<Real, 3>& mu, const std::array<Real, 6>& s) {
  // d/dxi_k P = alpha_k + g_k . xi
  const std::array<Real, 3> alpha = {a[0], a[1], a[2]};
  const std::array<std::array<Real, 3>, 3> g = {{{2 * a[3], a[6], a[8]},
                                                  {a[6], 2 * a[4], a[7]},
                                                  {a[8], a[7], 2 * a[5]}}};
  Real first = 0;
  for (int k = 0; k < 3; ++k) {
    const auto& v = g[k];
    const Real quad = v[0] * v[0] * s[0] + v[1] * v[1] * s[1] + v[2] * v[2] * s[2] +
                      2 * (v[0] * v[1] * s[3] + v[1] * v[2] * s[4] + v[0] * v[2] * s[5]);
    const Real lin = v[0] * mu[0] + v[1] * mu[1] + v[2] * mu[2];
    first += alpha[k] * alpha[k] + 2 * alpha[k] * lin + quad;
  }
  const Real second = 4 * (a[3] * a[3] + a[4] * a[4] + a[5] * a[5]) + a[6] * a[6] + a[7] * a[7] +
                      a[8] * a[8];
  return firstScale * first + secondScale * second;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, int cell, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-9);
  if (qr.rank() < a.cols())
    throw SingularStencilError(cell, std::string("rank-deficient least-squares system for ") + what);
  return qr.solve(Eigen::MatrixXd::Identity(a.rows(), a.rows()));
}

}  // namespace

std::array<int, 6> hex_face_order(std::span<const Vec3> neighborCentroids, const Vec3& center) {
  if (neighborCentroids.size() != 6) throw StencilError(-1, "hexahedron needs six face neighbours");
  std::array<Vec3, 6> dirs;
  for (int j = 0; j < 6; ++j) dirs[j] = (neighborCentroids[j] - center).normalized();
  int first = 0, last = 1;
  double best = std::numeric_limits<double>::max();
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) {
      const double d = dirs[a].dot(dirs[b]);
      if (d < best) {
        best = d;
        first = a;
        last = b;
      }
    }
  }
  const Vec3 axis = (dirs[first] - dirs[last]).normalized();
  std::vector<int> ring;
  for (int j = 0; j < 6; ++j)
    if (j != first && j != last) ring.push_back(j);
  const Vec3 e1 = (dirs[ring[0]] - dirs[ring[0]].dot(axis) * axis).normalized();
  const Vec3 e2 = axis.cross(e1);
  std::array<double, 6> angle{};
  for (int j : ring) {
    double a = std::atan2(dirs[j].dot(e2), dirs[j].dot(e1));
    if (a < 0) a += 2 * std::numbers::pi;
    angle[j] = j == ring[0] ? 0.0 : a;
  }
  std::stable_sort(ring.begin(), ring.end(), [&](int x, int y) { return angle[x] < angle[y]; });
  return {first, ring[0], ring[1], ring[2], ring[3], last};
}

StencilSet select_stencils(const Connectivity& tables, const Mesh& mesh, int cell) {
  if (cell < 0 || cell >= static_cast<int>(tables.twoLayer.size()) || tables.twoLayer[cell].empty())
    throw StencilError(cell, "no two-layer neighbour list");
  StencilSet s;
  s.big = tables.twoLayer[cell];
  const auto& nbs = tables.cellNeighbor[cell];
  for (int nb : nbs)
    if (nb == kNoCell) throw StencilError(cell, "unresolved face neighbour");

  const CellKind kind = mesh.cells[tables.mirror(cell)].kind;
  if (kind == CellKind::Tetrahedron) {
    for (int m = 0; m < 4; ++m) {
      std::vector<int> sub;
      auto add = [&](int id) {
        if (id != cell && id != kNoCell && std::find(sub.begin(), sub.end(), id) == sub.end())
          sub.push_back(id);
      };
      for (int j : kTetTriples[m]) add(nbs[j]);
      for (int second : tables.cellNeighbor[nbs[m]]) add(second);
      s.subs.push_back(std::move(sub));
    }
  } else {
    std::array<Vec3, 6> centroids;
    for (int j = 0; j < 6; ++j) centroids[j] = extended_centroid(tables, mesh, nbs[j]);
    const auto order = hex_face_order(centroids, extended_centroid(tables, mesh, cell));
    for (const auto& triple : kHexTriples) {
      std::vector<int> sub;
      for (int label : triple) {
        const int id = nbs[order[label]];
        if (id != cell && std::find(sub.begin(), sub.end(), id) == sub.end()) sub.push_back(id);
      }
      s.subs.push_back(std::move(sub));
    }
  }
  const double m = static_cast<double>(s.subs.size());
  s.linearWeights.assign(s.subs.size() + 1, kSubStencilWeight);
  s.linearWeights[0] = 1.0 - kSubStencilWeight * m;
  return s;
}

CellMoments CellMoments::compute(const Mesh& mesh) {
  CellMoments out;
  out.covariance.resize(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Vec3& x0 = mesh.cells[c].centroid;
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& q : cell_quadrature(mesh, c)) {
      const Vec3 d = q.position - x0;
      cov += q.weight * d * d.transpose();
    }
    out.covariance[c] = cov / mesh.cells[c].volume;
  }
  return out;
}

std::array<double, kNumBasis> scaled_monomial_means(const Mesh& mesh, const Connectivity& tables,
                                                    const CellMoments& moments, int cell,
                                                    const Vec3& center, double radius) {
  const int mirror = tables.mirror(cell);
  const AffineMap map = tables.transform(cell);
  const Vec3 mu = (map.apply(mesh.cells[mirror].centroid) - center) / radius;
  const Eigen::Matrix3d e =
      map.linear * moments.covariance[mirror] * map.linear.transpose() / (radius * radius) +
      mu * mu.transpose();
  return {mu.x(), mu.y(), mu.z(), e(0, 0), e(1, 1), e(2, 2), e(0, 1), e(1, 2), e(0, 2)};
}

ReconstructionOperator build_reconstruction_operator(const Mesh& mesh, const Connectivity& tables,
                                                     const CellMoments& moments, int cell,
                                                     const StencilSet& stencils) {
  ReconstructionOperator op;
  op.cell = cell;
  op.center = extended_centroid(tables, mesh, cell);
  op.volume = mesh.cells[tables.mirror(cell)].volume;
  if (stencils.big.size() < static_cast<std::size_t>(kNumBasis))
    throw StencilError(cell, "big stencil has fewer than 9 cells");
  op.radius = 0.0;
  for (int id : stencils.big)
    op.radius = std::max(op.radius, (extended_centroid(tables, mesh, id) - op.center).norm());
  if (!(op.radius > 0.0)) throw StencilError(cell, "stencil cells coincide with the target");

  op.basisMean = scaled_monomial_means(mesh, tables, moments, cell, op.center, op.radius);
  const auto& bm = op.basisMean;
  op.firstMoment = Vec3(bm[0], bm[1], bm[2]);
  op.secondMoment << bm[3], bm[6], bm[8], bm[6], bm[4], bm[7], bm[8], bm[7], bm[5];

  auto rows = [&](const std::vector<int>& ids, int cols) {
    Eigen::MatrixXd a(ids.size(), cols);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto m = scaled_monomial_means(mesh, tables, moments, ids[k], op.center, op.radius);
      for (int d = 0; d < cols; ++d) a(static_cast<Eigen::Index>(k), d) = m[d] - bm[d];
    }
    return a;
  };

  op.big = stencils.big;
  op.bigPinv = pseudo_inverse(rows(op.big, kNumBasis), cell, "the quadratic fit");
  op.subs = stencils.subs;
  for (const auto& sub : op.subs) {
    if (sub.size() < static_cast<std::size_t>(kNumLinear))
      throw StencilError(cell, "sub-stencil has fewer than 3 cells besides the target");
    op.subPinv.push_back(pseudo_inverse(rows(sub, kNumLinear), cell, "a linear fit"));
  }
  op.linearWeights = stencils.linearWeights;
  return op;
}

double smoothness_quadratic(std::span<const double, kNumBasis> coeffs, const ReconstructionOperator& op) {
  std::array<double, kNumBasis> a;
  std::copy(coeffs.begin(), coeffs.end(), a.begin());
  const double r2 = op.radius * op.radius;
  const auto& s = op.secondMoment;
  return beta_quadratic<double>(a, std::pow(op.volume, 2.0 / 3.0) / r2,
                                std::pow(op.volume, 4.0 / 3.0) / (r2 * r2),
                                {op.firstMoment.x(), op.firstMoment.y(), op.firstMoment.z()},
                                {s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(1, 2), s(0, 2)});
}

double smoothness_linear(std::span<const double, kNumLinear> coeffs, const ReconstructionOperator& op) {
  const double norm2 = coeffs[0] * coeffs[0] + coeffs[1] * coeffs[1] + coeffs[2] * coeffs[2];
  return std::pow(op.volume, 2.0 / 3.0) / (op.radius * op.radius) * norm2;
}

template <class Real>
ReconstructionPlan<Real>::ReconstructionPlan(std::span<const ReconstructionOperator> ops) {
  targets_.reserve(ops.size());
  for (const auto& op : ops) {
    if (op.subs.size() > 8) throw StencilError(op.cell, "more than eight sub-stencils");
    Target t{};
    t.cell = op.cell;
    t.numSubs = static_cast<int>(op.subs.size());
    for (int k = 0; k < 3; ++k) t.center[k] = static_cast<Real>(op.center[k]);
    t.invRadius = static_cast<Real>(1.0 / op.radius);
    for (int d = 0; d < kNumBasis; ++d) t.basisMean[d] = static_cast<Real>(op.basisMean[d]);
    const double r2 = op.radius * op.radius;
    t.firstScale = static_cast<Real>(std::pow(op.volume, 2.0 / 3.0) / r2);
    t.secondScale = static_cast<Real>(std::pow(op.volume, 4.0 / 3.0) / (r2 * r2));
    for (int k = 0; k < 3; ++k) t.firstMoment[k] = static_cast<Real>(op.firstMoment[k]);
    const auto& s = op.secondMoment;
    t.secondMoment = {static_cast<Real>(s(0, 0)), static_cast<Real>(s(1, 1)), static_cast<Real>(s(2, 2)),
                      static_cast<Real>(s(0, 1)), static_cast<Real>(s(1, 2)), static_cast<Real>(s(0, 2))};
    t.gamma0 = static_cast<Real>(op.linearWeights[0]);
    t.gammaSub = static_cast<Real>(kSubStencilWeight);

    t.bigBegin = static_cast<int>(bigIds_.size());
    t.bigCount = static_cast<int>(op.big.size());
    for (std::size_t k = 0; k < op.big.size(); ++k) {
      bigIds_.push_back(op.big[k]);
      for (int r = 0; r < kNumBasis; ++r)
        bigCoef_.push_back(static_cast<Real>(op.bigPinv(r, static_cast<Eigen::Index>(k))));
    }
    for (std::size_t m = 0; m < op.subs.size(); ++m) {
      t.subBegin[m] = static_cast<int>(subIds_.size());
      for (std::size_t k = 0; k < op.subs[m].size(); ++k) {
        subIds_.push_back(op.subs[m][k]);
        for (int r = 0; r < kNumLinear; ++r)
          subCoef_.push_back(static_cast<Real>(op.subPinv[m](r, static_cast<Eigen::Index>(k))));
      }
    }
    t.subBegin[op.subs.size()] = static_cast<int>(subIds_.size());
    targets_.push_back(t);
  }
}

template <class Real>
void ReconstructionPlan<Real>::reconstruct(std::size_t i, std::span<const State<Real>> fields,
                                           CellPolynomial<Real>& weno,
                                           CellPolynomial<Real>& smooth) const {
  const Target& t = targets_[i];
  const State<Real>& q0 = fields[t.cell];

  std::array<State<Real>, kNumBasis> a{};
  for (int k = 0; k < t.bigCount; ++k) {
    const State<Real>& q = fields[bigIds_[t.bigBegin + k]];
    const Real* coef = &bigCoef_[static_cast<std::size_t>(t.bigBegin + k) * kNumBasis];
    State<Real> diff;
    for (int v = 0; v < kNumVars; ++v) diff[v] = q[v] - q0[v];
    for (int r = 0; r < kNumBasis; ++r)
      for (int v = 0; v < kNumVars; ++v) a[r][v] += coef[r] * diff[v];
  }

  std::array<std::array<State<Real>, kNumLinear>, 8> b{};
  for (int m = 0; m < t.numSubs; ++m) {
    for (int slot = t.subBegin[m]; slot < t.subBegin[m + 1]; ++slot) {
      const State<Real>& q = fields[subIds_[slot]];
      const Real* coef = &subCoef_[static_cast<std::size_t>(slot) * kNumLinear];
      State<Real> diff;
      for (int v = 0; v < kNumVars; ++v) diff[v] = q[v] - q0[v];
      for (int r = 0; r < kNumLinear; ++r)
        for (int v = 0; v < kNumVars; ++v) b[m][r][v] += coef[r] * diff[v];
    }
  }

  weno.mean = q0;
  smooth.mean = q0;
  smooth.coeffs = a;

  std::array<Real, 9> beta{}, gamma{}, omega{};
  gamma[0] = t.gamma0;
  for (int m = 1; m <= t.numSubs; ++m) gamma[m] = t.gammaSub;
  const std::span<const Real> betaView(beta.data(), static_cast<std::size_t>(t.numSubs + 1));
  const std::span<const Real> gammaView(gamma.data(), betaView.size());
  const std::span<Real> omegaView(omega.data(), betaView.size());

  std::array<std::array<Real, kNumLinear>, 8> bv;
  const std::span<const std::array<Real, kNumLinear>> linearView(bv.data(), static_cast<std::size_t>(t.numSubs));
  for (int v = 0; v < kNumVars; ++v) {
    std::array<Real, kNumBasis> av;
    for (int r = 0; r < kNumBasis; ++r) av[r] = a[r][v];
    beta[0] = beta_quadratic<Real>(av, t.firstScale, t.secondScale, t.firstMoment, t.secondMoment);
    for (int m = 0; m < t.numSubs; ++m) {
      for (int r = 0; r < kNumLinear; ++r) bv[m][r] = b[m][r][v];
      beta[m + 1] = t.firstScale * (bv[m][0] * bv[m][0] + bv[m][1] * bv[m][1] + bv[m][2] * bv[m][2]);
    }
    weno_weights<Real>(betaView, gammaView, omegaView);
    const auto combined = weno_combine<Real>(av, linearView, gammaView, omegaView);
    for (int r = 0; r < kNumBasis; ++r) weno.coeffs[r][v] = combined[r];
  }
}

template <class Real>
State<Real> ReconstructionPlan<Real>::value(std::size_t i, const CellPolynomial<Real>& poly,
                                            const std::array<Real, 3>& x) const {
  const Target& t = targets_[i];
  const Real xi = (x[0] - t.center[0]) * t.invRadius;
  const Real eta = (x[1] - t.center[1]) * t.invRadius;
  const Real zeta = (x[2] - t.center[2]) * t.invRadius;
  const std::array<Real, kNumBasis> basis = {
      xi - t.basisMean[0],         eta - t.basisMean[1],         zeta - t.basisMean[2],
      xi * xi - t.basisMean[3],    eta * eta - t.basisMean[4],   zeta * zeta - t.basisMean[5],
      xi * eta - t.basisMean[6],   eta * zeta - t.basisMean[7],  xi * zeta - t.basisMean[8]};
  State<Real> out = poly.mean;
  for (int r = 0; r < kNumBasis; ++r)
    for (int v = 0; v < kNumVars; ++v) out[v] += poly.coeffs[r][v] * basis[r];
  return out;
}

template <class Real>
std::array<State<Real>, 3> ReconstructionPlan<Real>::gradient(std::size_t i, const CellPolynomial<Real>& poly,
                                                             const std::array<Real, 3>& x) const {
  const Target& t = targets_[i];
  const Real xi = (x[0] - t.center[0]) * t.invRadius;
  const Real eta = (x[1] - t.center[1]) * t.invRadius;
  const Real zeta = (x[2] - t.center[2]) * t.invRadius;
  const auto& c = poly.coeffs;
  std::array<State<Real>, 3> g;
  for (int v = 0; v < kNumVars; ++v) {
    g[0][v] = (c[0][v] + Real(2) * xi * c[3][v] + eta * c[6][v] + zeta * c[8][v]) * t.invRadius;
    g[1][v] = (c[1][v] + Real(2) * eta * c[4][v] + xi * c[6][v] + zeta * c[7][v]) * t.invRadius;
    g[2][v] = (c[2][v] + Real(2) * zeta * c[5][v] + eta * c[7][v] + xi * c[8][v]) * t.invRadius;
  }
  return g;
}

template <class Real>
PointState<Real> ReconstructionPlan<Real>::evaluate(std::size_t i, const CellPolynomial<Real>& poly,
                                                    const std::array<Real, 3>& x) const {
  return {value(i, poly, x), gradient(i, poly, x)};
}

template class ReconstructionPlan<float>;
template class ReconstructionPlan<double>;

}  // namespace kinflow
