#pragma once

#include "kinflow/boundary.hpp"
#include "kinflow/config.hpp"
#include "kinflow/connectivity.hpp"
#include "kinflow/diagnostics.hpp"
#include "kinflow/discretization.hpp"
#include "kinflow/exchange.hpp"
#include "kinflow/kinetic_flux.hpp"
#include "kinflow/partition.hpp"
#include "kinflow/reconstruction.hpp"
#include "kinflow/time_integration.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kinflow {

/// Physical model shared by every partition.
struct SolverSettings {
  GasModel gas;
  double c1 = 0.0;
  Primitive freeStream;
};

/// Wall-clock seconds per phase of the stepping loop.
struct PhaseTimes {
  double reconstruction = 0.0;
  double flux = 0.0;
  double update = 0.0;
  double communication = 0.0;
  double sum() const { return reconstruction + flux + update + communication; }
};

/// Steps the owned cells of one partition. Remote copies are refreshed from
/// their owners and boundary ghosts recomputed before every stage.
template <class Real>
class SubdomainSolver {
 public:
  SubdomainSolver(const SubdomainPlan& plan, const SolverSettings& settings, Transport& transport);

  std::span<State<Real>> owned() { return owned_; }
  std::span<const State<Real>> owned() const { return owned_; }
  const SubdomainPlan& plan() const { return *plan_; }

  /// CFL-limited step of the owned cells (not reduced across partitions).
  double stable_time_step(double cfl) const;

  /// One two-stage step of size dt; throws PositivityError on failure.
  void step(Real dt, std::uint64_t stepIndex);

  /// Residual L and its time derivative for owned states q.
  void evaluate(std::uint32_t stage, std::uint64_t stepIndex, std::span<const State<Real>> q, Real dt,
                std::span<State<Real>> residual, std::span<State<Real>> slope);

  const PhaseTimes& phases() const { return phases_; }
  PhaseTimes& phases() { return phases_; }
  const CommTiming& comm() const { return comm_; }
  /// Face points where a reconstructed state was not admissible and the
  /// cell mean was used instead.
  std::size_t fallbacks() const { return fallbacks_; }

 private:
  struct FaceData {
    int left;
    int right;
    Frame<Real> frame;
    int firstPoint;
    int numPoints;
  };
  struct GhostData {
    int cell;
    int base;
    GhostRule rule;
    std::array<Real, 3> normal;
  };

  void fill_ghosts();
  void reconstruct_targets();
  void compute_fluxes(Real dt);

  const SubdomainPlan* plan_;
  ReconstructionPlan<Real> recon_;
  HaloExchange<Real> halo_;
  Transport* transport_;
  std::vector<FaceData> faces_;
  std::vector<std::array<Real, 3>> pointLeft_;
  std::vector<std::array<Real, 3>> pointRight_;
  std::vector<Real> pointWeight_;
  std::vector<GhostData> ghosts_;
  ResidualStencil<Real> residual_;
  std::vector<double> height_;
  std::vector<int> ownedGlobal_;

  std::vector<State<Real>> owned_;
  std::vector<State<Real>> fields_;
  std::vector<CellPolynomial<Real>> weno_;
  std::vector<CellPolynomial<Real>> smooth_;
  std::vector<FluxFit<Real>> fits_;
  std::vector<unsigned char> computed_;
  StageState<Real> work_;

  GasModel gas_;
  CollisionModel<Real> collision_;
  bool needSideSlopes_;
  Real internalDof_;
  Real gamma_;
  FarfieldReference<Real> farfield_;

  PhaseTimes phases_;
  CommTiming comm_;
  std::size_t fallbacks_ = 0;
};

extern template class SubdomainSolver<float>;
extern template class SubdomainSolver<double>;

/// Mesh, boundary treatment, decomposition and initial fields of a run.
struct Problem {
  Mesh mesh;
  BoundaryConditions bcs;
  Connectivity tables;
  Discretization disc;
  PartitionMap partition;
  std::vector<SubdomainPlan> plans;
  SolverSettings settings;
  std::vector<State<double>> initial;
  double cfl = 0.3;
};

Problem build_problem(const RunConfig& config);
/// Replaces the decomposition of an existing problem.
void repartition(Problem& problem, int parts, const std::filesystem::path& partitionFile = {});

struct RunResult {
  /// Gathered owned states in global cell order (rank 0 only with MPI).
  std::vector<State<double>> fields;
  double time = 0.0;
  long steps = 0;
  std::string stopReason;
  /// Wall time of the stepping loop, excluding output.
  double wallTime = 0.0;
  double outputTime = 0.0;
  /// Phase times and exchange timings of the slowest partition.
  PhaseTimes phases;
  CommTiming comm;
  std::size_t fallbacks = 0;
  /// Max-norm density rate after each step.
  std::vector<double> residualHistory;
  std::optional<ErrorNorms> error;
  double conservationDrift = 0.0;
  WakeMetrics wake;
  std::vector<std::string> files;
};

/// Runs a prepared problem with one thread per partition.
RunResult run_problem(const Problem& problem, const RunConfig& config);

/// Runs the partition `transport.rank()` of a prepared problem; every rank
/// must call this. Results are complete on rank 0.
RunResult run_rank(const Problem& problem, const RunConfig& config, Transport& transport);

/// build_problem followed by run_problem.
RunResult run_simulation(const RunConfig& config);

/// Human-readable summary including the communication breakdown.
std::string format_report(const RunResult& result, const RunConfig& config);

}  // namespace kinflow
