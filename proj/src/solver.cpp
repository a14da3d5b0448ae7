#include "kinflow/solver.hpp"

#include "kinflow/output.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

namespace kinflow {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

template <class Real>
std::array<Real, 3> to_array(const Vec3& x) {
  return {static_cast<Real>(x.x()), static_cast<Real>(x.y()), static_cast<Real>(x.z())};
}

template <class To, class From>
State<To> convert(const State<From>& s) {
  State<To> out;
  for (int v = 0; v < kNumVars; ++v) out[v] = static_cast<To>(s[v]);
  return out;
}

template <class Real>
bool admissible(const State<Real>& q, Real gamma) {
  return q[0] > Real(0) && pressure(q, gamma) > Real(0);
}

}  // namespace

template <class Real>
SubdomainSolver<Real>::SubdomainSolver(const SubdomainPlan& plan, const SolverSettings& settings,
                                       Transport& transport)
    : plan_(&plan),
      recon_(plan.disc.targets),
      halo_(plan.peers, transport),
      transport_(&transport),
      height_(plan.disc.height),
      gas_(settings.gas),
      internalDof_(static_cast<Real>(settings.gas.internal_dof())),
      gamma_(static_cast<Real>(settings.gas.gamma)),
      farfield_(settings.freeStream, settings.gas.gamma) {
  const Discretization& d = plan.disc;
  for (const FluxFace& ff : d.faces) {
    FaceData fd;
    fd.left = ff.left;
    fd.right = ff.right;
    fd.frame = {to_array<Real>(ff.normal), to_array<Real>(ff.t1), to_array<Real>(ff.t2)};
    fd.firstPoint = static_cast<int>(pointWeight_.size());
    fd.numPoints = static_cast<int>(ff.points.size());
    for (const QuadraturePoint& q : ff.points) {
      pointLeft_.push_back(to_array<Real>(q.position));
      pointRight_.push_back(to_array<Real>(q.position + ff.rightShift));
      pointWeight_.push_back(static_cast<Real>(q.weight));
    }
    faces_.push_back(fd);
  }
  for (const GhostSlot& g : d.ghosts) ghosts_.push_back({g.cell, g.base, g.rule, to_array<Real>(g.normal)});
  residual_.begin = d.residual.begin;
  residual_.face = d.residual.face;
  for (double c : d.residual.coef) residual_.coef.push_back(static_cast<Real>(c));
  for (int c = 0; c < d.numOwned; ++c) ownedGlobal_.push_back(d.globalCell[c]);

  collision_.referenceViscosity = static_cast<Real>(settings.gas.referenceViscosity);
  collision_.referenceTemperature = static_cast<Real>(settings.gas.referenceTemperature);
  collision_.exponent = static_cast<Real>(settings.gas.viscosityExponent);
  collision_.c1 = static_cast<Real>(settings.c1);
  needSideSlopes_ = settings.gas.viscous() || settings.c1 > 0.0;

  owned_.resize(static_cast<std::size_t>(d.numOwned));
  fields_.resize(static_cast<std::size_t>(d.num_cells()));
  weno_.resize(d.targets.size());
  smooth_.resize(d.targets.size());
  fits_.resize(faces_.size());
  computed_.assign(faces_.size(), 0);
}

template <class Real>
double SubdomainSolver<Real>::stable_time_step(double cfl) const {
  return local_time_step<Real>(owned_, height_, gas_, cfl);
}

template <class Real>
void SubdomainSolver<Real>::fill_ghosts() {
  for (const GhostData& g : ghosts_) {
    switch (g.rule) {
      case GhostRule::Copy: fields_[g.cell] = fields_[g.base]; break;
      case GhostRule::Wall: fields_[g.cell] = wall_ghost(fields_[g.base]); break;
      case GhostRule::Farfield: fields_[g.cell] = farfield_ghost(fields_[g.base], farfield_, g.normal); break;
    }
  }
}

template <class Real>
void SubdomainSolver<Real>::reconstruct_targets() {
  for (std::size_t t = 0; t < weno_.size(); ++t) recon_.reconstruct(t, fields_, weno_[t], smooth_[t]);
}

template <class Real>
void SubdomainSolver<Real>::compute_fluxes(Real dt) {
  const Real half = Real(0.5);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const FaceData& fd = faces_[f];
    State<Real> sumHalf{}, sumFull{};
    for (int k = fd.firstPoint; k < fd.firstPoint + fd.numPoints; ++k) {
      FluxInput<Real> in;
      State<Real> l = recon_.value(fd.left, weno_[fd.left], pointLeft_[k]);
      State<Real> r = recon_.value(fd.right, weno_[fd.right], pointRight_[k]);
      const bool leftOk = admissible(l, gamma_);
      const bool rightOk = admissible(r, gamma_);
      if (!leftOk) {
        l = weno_[fd.left].mean;
        ++fallbacks_;
      }
      if (!rightOk) {
        r = weno_[fd.right].mean;
        ++fallbacks_;
      }
      in.left.value = fd.frame.to_local(l);
      in.right.value = fd.frame.to_local(r);
      if (needSideSlopes_) {
        // A fallback state carries no slope.
        if (leftOk) in.left.derivative = fd.frame.derivatives(recon_.gradient(fd.left, weno_[fd.left], pointLeft_[k]));
        if (rightOk)
          in.right.derivative = fd.frame.derivatives(recon_.gradient(fd.right, weno_[fd.right], pointRight_[k]));
      }
      const auto sl = recon_.gradient(fd.left, smooth_[fd.left], pointLeft_[k]);
      const auto sr = recon_.gradient(fd.right, smooth_[fd.right], pointRight_[k]);
      std::array<State<Real>, 3> central;
      for (int d = 0; d < 3; ++d)
        for (int i = 0; i < kNumVars; ++i) central[d][i] = half * (sl[d][i] + sr[d][i]);

      in.centralDerivative = fd.frame.derivatives(central);
      in.dt = dt;
      const FluxPair<Real> flux = interface_flux(in, collision_, internalDof_);
      const Real w = pointWeight_[k];
      for (int i = 0; i < kNumVars; ++i) {
        sumHalf[i] += w * flux.half[i];
        sumFull[i] += w * flux.full[i];
      }
    }
    fits_[f] = flux_time_coefficients(fd.frame.to_global(sumHalf), fd.frame.to_global(sumFull), dt);
    computed_[f] = 1;
  }
}

template <class Real>
void SubdomainSolver<Real>::evaluate(std::uint32_t stage, std::uint64_t stepIndex, std::span<const State<Real>> q,
                                     Real dt, std::span<State<Real>> residual, std::span<State<Real>> slope) {
  // The intermediate stage state can already be unphysical.
  if (stage > 1) check_positivity<Real>(q, gamma_, ownedGlobal_);
  std::copy(q.begin(), q.end(), fields_.begin());

  auto start = Clock::now();
  const double commBefore = comm_.total();
  halo_.exchange(fields_, stepIndex, stage, comm_);
  phases_.communication += comm_.total() - commBefore;

  start = Clock::now();
  fill_ghosts();
  reconstruct_targets();
  phases_.reconstruction += elapsed(start);

  start = Clock::now();
  std::fill(computed_.begin(), computed_.end(), 0);
  compute_fluxes(dt);
  phases_.flux += elapsed(start);

  start = Clock::now();
  assemble_residual<Real>(residual_, fits_, computed_, residual, slope);
  phases_.update += elapsed(start);
}

template <class Real>
void SubdomainSolver<Real>::step(Real dt, std::uint64_t stepIndex) {
  const auto start = Clock::now();
  const double before = phases_.sum();
  two_stage_step<Real>(owned_, dt, work_,
                       [&](int stage, std::span<const State<Real>> q, std::span<State<Real>> l,
                           std::span<State<Real>> dl) {
                         evaluate(static_cast<std::uint32_t>(stage + 1), stepIndex, q, dt, l, dl);
                       });
  check_positivity<Real>(owned_, gamma_, ownedGlobal_);
  // Stage updates and the positivity check are the time not claimed above.
  phases_.update += elapsed(start) - (phases_.sum() - before);
}

template class SubdomainSolver<float>;
template class SubdomainSolver<double>;

// ---------------------------------------------------------------------------
// Problem setup.

Problem build_problem(const RunConfig& config) {
  config.validate();
  Problem pb;
  MeshData data;
  if (!config.mesh.empty()) {
    const MeshFormat format = config.mesh.extension() == ".msh" ? MeshFormat::Gmsh : MeshFormat::Native;
    data = load_mesh(config.mesh, format);
  } else if (config.caseKind == CaseKind::AdvectionBox) {
    data = make_periodic_box(config.n, 2.0);
  } else if (config.caseKind == CaseKind::Sphere) {
    data = make_sphere_shell(config.n, {config.diameter, config.outerRadius, config.firstHeight});
  } else {
    throw ConfigError("the custom case needs a mesh");
  }
  pb.mesh = compute_geometry(std::move(data));
  pb.bcs = BoundaryConditions::defaults();
  if (config.wall == "farfield") pb.bcs.set("wall", BoundaryKind::Farfield);
  pb.tables = build_full_connectivity(pb.mesh, pb.bcs);
  pb.disc = build_discretization(pb.mesh, pb.tables, pb.bcs);

  SolverSettings& s = pb.settings;
  s.gas.gamma = config.gamma;
  s.gas.validate();
  s.freeStream = {1.0, config.mach, 0.0, 0.0, 1.0 / config.gamma};
  if (config.viscous()) {
    s.gas.referenceViscosity = config.free_stream_viscosity();
    s.gas.referenceTemperature = s.freeStream.p / s.freeStream.rho;
    s.gas.viscosityExponent = config.viscosityExponent;
  }
  s.c1 = config.c1_value();

  switch (config.caseKind) {
    case CaseKind::AdvectionBox: pb.initial = advection_initial_state(pb.mesh, config.gamma); break;
    case CaseKind::Sphere:
      pb.initial.assign(pb.mesh.cells.size(), to_conservative<double>(s.freeStream, config.gamma));
      break;
    case CaseKind::Custom: {
      Checkpoint cp = read_checkpoint(config.initial);
      if (cp.fields.size() != pb.mesh.cells.size())
        throw ConfigError("initial checkpoint has " + std::to_string(cp.fields.size()) + " cells, mesh has " +
                          std::to_string(pb.mesh.cells.size()));
      pb.initial = std::move(cp.fields);
      break;
    }
  }

  const bool tetrahedral = std::all_of(pb.mesh.cells.begin(), pb.mesh.cells.end(),
                                       [](const Cell& c) { return c.kind == CellKind::Tetrahedron; });
  pb.cfl = config.cfl_for(tetrahedral);
  repartition(pb, config.parts, config.partitionFile);
  return pb;
}

void repartition(Problem& problem, int parts, const std::filesystem::path& partitionFile) {
  if (!partitionFile.empty()) {
    problem.partition = read_partition_file(partitionFile, problem.tables.numPhysical);
  } else {
    std::vector<Vec3> centroids;
    for (const Cell& c : problem.mesh.cells) centroids.push_back(c.centroid);
    problem.partition = partition_rcb(centroids, parts);
  }
  problem.plans = build_subdomains(problem.disc, problem.tables, problem.partition);
}

// ---------------------------------------------------------------------------
// Stepping loop.

namespace {

constexpr std::uint32_t kGatherStage = 3;

/// Collects every partition's owned states on rank 0 in global order.
template <class Real>
std::vector<State<double>> gather_owned(const Problem& pb, std::span<const State<Real>> owned, Transport& t,
                                        std::uint64_t tag) {
  const int rank = t.rank();
  const SubdomainPlan& plan = pb.plans[rank];
  constexpr std::size_t kBytes = kNumVars * sizeof(double);
  if (rank != 0) {
    std::vector<std::byte> buf(kMessageHeaderBytes + owned.size() * kBytes);
    encode_header({tag, kGatherStage, static_cast<std::uint32_t>(owned.size() * kBytes)},
                  std::span<std::byte, kMessageHeaderBytes>(buf.data(), kMessageHeaderBytes));
    for (std::size_t c = 0; c < owned.size(); ++c)
      encode_state(convert<double>(owned[c]), buf.data() + kMessageHeaderBytes + c * kBytes);
    t.initiate_send(0, buf);
    t.wait_all();
    return {};
  }
  std::vector<State<double>> out(pb.mesh.cells.size());
  for (std::size_t c = 0; c < owned.size(); ++c) out[plan.to_global(static_cast<int>(c))] = convert<double>(owned[c]);
  std::vector<std::vector<std::byte>> bufs;
  for (int p = 1; p < t.size(); ++p) {
    bufs.emplace_back(kMessageHeaderBytes + static_cast<std::size_t>(pb.plans[p].disc.numOwned) * kBytes);
    t.initiate_receive(p, bufs.back());
  }
  t.wait_all();
  for (int p = 1; p < t.size(); ++p) {
    const auto& buf = bufs[p - 1];
    const MessageHeader h =
        decode_header(std::span<const std::byte, kMessageHeaderBytes>(buf.data(), kMessageHeaderBytes));
    if (h.step != tag || h.stage != kGatherStage)
      throw ScheduleError("gather message from partition " + std::to_string(p) + " is out of sequence");
    const SubdomainPlan& other = pb.plans[p];
    for (int c = 0; c < other.disc.numOwned; ++c)
      out[other.to_global(c)] = decode_state<double>(buf.data() + kMessageHeaderBytes + c * kBytes);
  }
  return out;
}

std::string output_name(const char* stem, int index, int part = -1) {
  char buf[64];
  if (part < 0) std::snprintf(buf, sizeof(buf), "%s_%04d.vtk", stem, index);
  else std::snprintf(buf, sizeof(buf), "%s_%04d_p%d.vtk", stem, index, part);
  return buf;
}

template <class Real>
RunResult run_rank_impl(const Problem& pb, const RunConfig& config, Transport& t) {
  const int rank = t.rank();
  if (t.size() != static_cast<int>(pb.plans.size()))
    throw TransportError("transport has " + std::to_string(t.size()) + " ranks for " +
                         std::to_string(pb.plans.size()) + " partitions");
  const SubdomainPlan& plan = pb.plans[rank];
  const int numOwned = plan.disc.numOwned;
  SubdomainSolver<Real> solver(plan, pb.settings, t);
  std::vector<State<double>> initialOwned(static_cast<std::size_t>(numOwned));
  for (int c = 0; c < numOwned; ++c) {
    initialOwned[c] = pb.initial[plan.to_global(c)];
    solver.owned()[c] = convert<Real>(initialOwned[c]);
  }

  RunResult res;
  const bool writeFiles = !config.output.empty();
  const int nParts = t.size();
  int outputIndex = 0;
  std::uint64_t gatherTag = 0;
  auto write_output = [&](double time, long step, const char* stem) {
    const auto start = Clock::now();
    auto global = gather_owned<Real>(pb, solver.owned(), t, gatherTag++);
    if (writeFiles) {
      if (nParts > 1) {
        std::vector<int> cells;
        std::vector<State<double>> local;
        for (int c = 0; c < numOwned; ++c) {
          cells.push_back(plan.to_global(c));
          local.push_back(convert<double>(solver.owned()[c]));
        }
        const auto path = config.output / output_name(stem, outputIndex, rank);
        write_vtk(path, pb.mesh, cells, local, pb.settings.gas.gamma);
        res.files.push_back(path.string());
      }
      if (rank == 0) {
        std::vector<int> cells(pb.mesh.cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = static_cast<int>(c);
        const auto path = config.output / output_name(stem, outputIndex, -1);
        write_vtk(path, pb.mesh, cells, global, pb.settings.gas.gamma);
        res.files.push_back(path.string());
      }
    }
    ++outputIndex;
    res.outputTime += elapsed(start);
    (void)time;
    (void)step;
    return global;
  };

  auto reduce_min = [&](double v) {
    const auto start = Clock::now();
    const double r = t.reduce_min(v);
    solver.phases().communication += elapsed(start);
    return r;
  };

  const bool fixedStep = config.time_step_mode() == TimeStepMode::Fixed;
  double fixedDt = 0.0;
  if (fixedStep) {
    // Taken from the double-precision initial field so both precisions
    // follow the same schedule.
    fixedDt = checked_time_step(reduce_min(local_time_step<double>(initialOwned, plan.disc.height, pb.settings.gas, pb.cfl)));
  }

  const double stop = config.stopTime;
  double nextOutput = config.outputInterval > 0.0 ? std::min(config.outputInterval, stop) : stop;
  double time = 0.0;
  long step = 0;
  double peak = 0.0;
  std::vector<Real> previous(static_cast<std::size_t>(numOwned));
  res.stopReason = "stop-time";

  const auto loopStart = Clock::now();
  try {
    while (time < stop) {
      if (config.maxSteps > 0 && step >= config.maxSteps) {
        res.stopReason = "max-steps";
        break;
      }
      if (config.maxWallTime > 0.0) {
        const double within = elapsed(loopStart) - res.outputTime <= config.maxWallTime ? 1.0 : 0.0;
        if (reduce_min(within) == 0.0) {
          res.stopReason = "wall-time budget";
          break;
        }
      }
      double dt = fixedDt;
      if (!fixedStep) {
        const auto start = Clock::now();
        const double local = solver.stable_time_step(pb.cfl);
        solver.phases().update += elapsed(start);
        dt = checked_time_step(reduce_min(local));
      }
      const double target = std::min(nextOutput, stop);
      bool landed = false;
      if (time + dt >= target - 1e-12 * std::max(1.0, target)) {
        dt = target - time;
        landed = true;
      }
      for (int c = 0; c < numOwned; ++c) previous[c] = solver.owned()[c][0];
      solver.step(static_cast<Real>(dt), static_cast<std::uint64_t>(step));
      time = landed ? target : time + dt;
      ++step;

      double localRate = 0.0;
      for (int c = 0; c < numOwned; ++c)
        localRate = std::max(localRate, std::abs(static_cast<double>(solver.owned()[c][0] - previous[c])) / dt);
      const double rate = -reduce_min(-localRate);
      res.residualHistory.push_back(rate);
      peak = std::max(peak, rate);
      if (config.steadyDrop > 0.0 && step >= 10 && rate <= peak * std::pow(10.0, -config.steadyDrop)) {
        res.stopReason = "steady";
        break;
      }
      if (landed && nextOutput < stop) {
        write_output(time, step, "solution");
        nextOutput = std::min(nextOutput + config.outputInterval, stop);
      }
    }
  } catch (const PositivityError&) {
    if (writeFiles) {
      std::vector<int> cells;
      std::vector<State<double>> local;
      for (int c = 0; c < numOwned; ++c) {
        cells.push_back(plan.to_global(c));
        local.push_back(convert<double>(solver.owned()[c]));
      }
      write_vtk(config.output / output_name("failure", static_cast<int>(step), rank), pb.mesh, cells, local,
                pb.settings.gas.gamma);
    }
    throw;
  }
  res.wallTime = elapsed(loopStart) - res.outputTime;
  res.time = time;
  res.steps = step;

  res.fields = write_output(time, step, "solution");
  if (rank == 0 && writeFiles && config.checkpoint) {
    CheckpointHeader h;
    h.cells = res.fields.size();
    h.time = time;
    h.step = static_cast<std::uint64_t>(step);
    h.gamma = pb.settings.gas.gamma;
    h.precision = std::string(to_string(config.precision));
    const auto path = config.output / "checkpoint.kfc";
    write_checkpoint(path, h, res.fields);
    res.files.push_back(path.string());
  }

  // Report the full breakdown of the slowest partition (lowest rank on ties)
  // so the phases add up to its wall time.
  auto slowest = [&](double v) { return -t.reduce_min(-v); };
  const double slowestWall = slowest(res.wallTime);
  const int chosen = static_cast<int>(
      t.reduce_min(res.wallTime == slowestWall ? rank : std::numeric_limits<double>::infinity()));
  auto from_chosen = [&](double v) {
    return -t.reduce_min(rank == chosen ? -v : std::numeric_limits<double>::infinity());
  };
  res.phases = solver.phases();
  res.comm = solver.comm();
  res.phases.reconstruction = from_chosen(res.phases.reconstruction);
  res.phases.flux = from_chosen(res.phases.flux);
  res.phases.update = from_chosen(res.phases.update);
  res.phases.communication = from_chosen(res.phases.communication);
  res.comm.pack = from_chosen(res.comm.pack);
  res.comm.initiate = from_chosen(res.comm.initiate);
  res.comm.wait = from_chosen(res.comm.wait);
  res.comm.unpack = from_chosen(res.comm.unpack);
  res.wallTime = slowestWall;
  res.fallbacks = static_cast<std::size_t>(slowest(static_cast<double>(solver.fallbacks())));

  if (rank == 0) {
    const State<double> before = conserved_totals(pb.mesh, pb.initial);
    res.conservationDrift = conservation_drift(before, conserved_totals(pb.mesh, res.fields));
    if (config.caseKind == CaseKind::AdvectionBox)
      res.error = density_error(pb.mesh, res.fields, advection_exact_averages(pb.mesh, time));
    if (config.caseKind == CaseKind::Sphere) res.wake = wake_metrics(pb.mesh, res.fields, config.diameter);
  }
  return res;
}

}  // namespace

RunResult run_rank(const Problem& problem, const RunConfig& config, Transport& transport) {
  if (config.precision == Precision::FP32) return run_rank_impl<float>(problem, config, transport);
  return run_rank_impl<double>(problem, config, transport);
}

RunResult run_problem(const Problem& problem, const RunConfig& config) {
  const int parts = static_cast<int>(problem.plans.size());
  InProcessHub hub(parts, std::chrono::minutes(30));
  if (parts == 1) {
    auto transport = hub.endpoint(0);
    return run_rank(problem, config, *transport);
  }
  std::vector<RunResult> results(static_cast<std::size_t>(parts));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(parts));
  std::vector<std::thread> workers;
  for (int r = 0; r < parts; ++r) {
    workers.emplace_back([&, r] {
      try {
        auto transport = hub.endpoint(r);
        results[r] = run_rank(problem, config, *transport);
      } catch (...) {
        errors[r] = std::current_exception();
        hub.abort();
      }
    });
  }
  for (auto& w : workers) w.join();
  // Prefer the original failure over the interruptions it caused elsewhere.
  std::exception_ptr first;
  for (auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const TransportError&) {
      if (!first) first = e;
    } catch (...) {
      std::rethrow_exception(e);
    }
  }
  if (first) std::rethrow_exception(first);
  RunResult out = std::move(results[0]);
  for (int r = 1; r < parts; ++r) out.files.insert(out.files.end(), results[r].files.begin(), results[r].files.end());
  return out;
}

RunResult run_simulation(const RunConfig& config) { return run_problem(build_problem(config), config); }

std::string format_report(const RunResult& r, const RunConfig& config) {
  std::ostringstream out;
  out.setf(std::ios::scientific);
  out.precision(6);
  out << "case " << to_string(config.caseKind) << ", " << config.parts << " partition(s), "
      << to_string(config.precision) << "\n";
  out << "steps " << r.steps << ", time " << r.time << ", stop: " << r.stopReason << "\n";
  if (r.error) out << "density error L1 " << r.error->l1 << "  L2 " << r.error->l2 << "  Linf " << r.error->linf << "\n";
  out << "conservation drift " << r.conservationDrift << "\n";
  if (!r.residualHistory.empty()) {
    const double peak = *std::max_element(r.residualHistory.begin(), r.residualHistory.end());
    out << "residual " << r.residualHistory.back() << " (peak " << peak << ", drop "
        << std::log10(peak / r.residualHistory.back()) << " decades)\n";
  }
  if (config.caseKind == CaseKind::Sphere) {
    out.unsetf(std::ios::scientific);
    out << "wake length L/D: " << (r.wake.length ? std::to_string(*r.wake.length) : "absent") << "\n";
    out << "separation angle: " << (r.wake.separationDeg ? std::to_string(*r.wake.separationDeg) + " deg" : "absent")
        << "\n";
    out.setf(std::ios::scientific);
  }
  if (r.fallbacks > 0) out << "positivity fallbacks " << r.fallbacks << "\n";
  out.unsetf(std::ios::scientific);
  out.setf(std::ios::fixed);
  out.precision(3);
  const double total = r.wallTime > 0.0 ? r.wallTime : 1.0;
  auto pct = [&](double v) { return 100.0 * v / total; };
  out << "wall time " << r.wallTime << " s (output " << r.outputTime << " s)\n";
  out << "  reconstruction " << r.phases.reconstruction << " s (" << pct(r.phases.reconstruction) << "%)\n";
  out << "  flux           " << r.phases.flux << " s (" << pct(r.phases.flux) << "%)\n";
  out << "  update         " << r.phases.update << " s (" << pct(r.phases.update) << "%)\n";
  out << "  communication  " << r.phases.communication << " s (" << pct(r.phases.communication) << "%)\n";
  out << "    pack " << r.comm.pack << " s, initiate " << r.comm.initiate << " s, wait " << r.comm.wait
      << " s, unpack " << r.comm.unpack << " s\n";
  out << "  unattributed   " << pct(total - r.phases.sum()) << "%\n";
  return out.str();
}

}  // namespace kinflow
