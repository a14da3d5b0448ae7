#include "kinflow/config.hpp"
#include "kinflow/output.hpp"
#include "kinflow/solver.hpp"

#include <CLI11.hpp>

#ifdef KINFLOW_HAVE_MPI
#include <mpi.h>
#endif

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace kinflow;

namespace {

struct RunArgs {
  std::string configFile;
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> options;
};

RunConfig resolve_config(const RunArgs& args) {
  RunConfig config;
  if (!args.configFile.empty()) load_config(args.configFile, config);
  for (const auto& [key, opt] : args.options)
    if (opt->count() > 0) config.set(key, args.overrides.at(key));
  config.validate();
  return config;
}

int run_command(const RunArgs& args) {
  const RunConfig config = resolve_config(args);
  if (config.transport == TransportKind::Mpi) {
#ifdef KINFLOW_HAVE_MPI
    MPI_Init(nullptr, nullptr);
    int status = 0;
    try {
      auto transport = make_mpi_transport();
      const Problem problem = build_problem(config);
      const RunResult result = run_rank(problem, config, *transport);
      if (transport->rank() == 0) std::cout << format_report(result, config);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      MPI_Abort(MPI_COMM_WORLD, 1);
    }
    MPI_Finalize();
    return status;
#else
    throw ConfigError("this build has no MPI transport");
#endif
  }
  const RunResult result = run_simulation(config);
  std::cout << format_report(result, config);
  for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
  return 0;
}

int partition_command(const std::string& mesh, int n, int parts, const std::string& external,
                      const std::string& writeFile) {
  RunConfig config;
  config.parts = parts;
  if (!mesh.empty()) {
    config.caseKind = CaseKind::AdvectionBox;
    config.mesh = mesh;
  } else {
    config.n = n;
  }
  config.partitionFile = external;
  const Problem problem = build_problem(config);
  const PartitionMap& map = problem.partition;
  std::cout << "cells " << problem.tables.numPhysical << ", partitions " << map.num_parts() << ", balance "
            << map.balance() << "\n";
  for (const SubdomainPlan& plan : problem.plans) {
    std::cout << "partition " << plan.part << ": owned " << plan.disc.numOwned << ", remote " << plan.disc.numRemote
              << " (layers " << plan.ghostLayers[0].size() << "/" << plan.ghostLayers[1].size() << "/"
              << plan.ghostLayers[2].size() << "), boundary ghosts " << plan.disc.ghosts.size() << ", sends "
              << plan.cellSend.size() << " to " << plan.peers.size() << " peer(s)\n";
  }
  if (!writeFile.empty()) {
    std::ofstream out(writeFile);
    if (!out) throw IoError("cannot write " + writeFile);
    for (int p : map.cellPart) out << p << "\n";
    std::cout << "wrote " << writeFile << "\n";
  }
  return 0;
}

int verify_accuracy_command(const std::string& nList, const std::string& precision, int parts) {
  std::vector<int> ns;
  std::stringstream ss(nList);
  for (std::string item; std::getline(ss, item, ',');) ns.push_back(std::stoi(item));
  const std::map<int, double> reference = {{10, 6.6070e-2}, {20, 8.7117e-3}};
  std::printf("%8s %8s %14s %8s %14s %8s %12s\n", "N", "steps", "L1", "order", "L2", "order", "L1/ref");
  double prevL1 = 0.0, prevL2 = 0.0;
  int prevN = 0;
  for (int n : ns) {
    RunConfig config;
    config.n = n;
    config.parts = parts;
    config.set("precision", precision);
    const RunResult r = run_simulation(config);
    const double l1 = r.error->l1, l2 = r.error->l2;
    std::string o1 = "-", o2 = "-", ratio = "-";
    if (prevN > 0) {
      const double h = std::log(static_cast<double>(n) / prevN);
      o1 = std::to_string(std::log(prevL1 / l1) / h);
      o2 = std::to_string(std::log(prevL2 / l2) / h);
    }
    if (auto it = reference.find(n); it != reference.end()) ratio = std::to_string(l1 / it->second);
    std::printf("%8d %8ld %14.6e %8s %14.6e %8s %12s\n", n, r.steps, l1, o1.c_str(), l2, o2.c_str(), ratio.c_str());
    std::fflush(stdout);
    prevL1 = l1;
    prevL2 = l2;
    prevN = n;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Third-order gas-kinetic finite-volume solver"};
  app.require_subcommand(1);

  RunArgs runArgs;
  auto* run = app.add_subcommand("run", "run a simulation");
  run->add_option("--config", runArgs.configFile, "key = value configuration file");
  for (const ConfigKey& key : config_keys())
    runArgs.options[key.name] = run->add_option("--" + key.name, runArgs.overrides[key.name], key.help);

  std::string mesh, external, writeFile;
  int parts = 1, n = 10;
  auto* part = app.add_subcommand("partition", "partition a mesh and report the subdomain plans");
  part->add_option("--mesh", mesh, "mesh file (defaults to the periodic tetrahedral box)");
  part->add_option("--n", n, "cubes per axis of the generated box");
  part->add_option("--parts", parts, "number of partitions")->required();
  part->add_option("--external", external, "partition file with one id per cell");
  part->add_option("--write", writeFile, "write the partition map to this file");

  std::string nList = "10,20", precision = "fp64";
  int verifyParts = 1;
  auto* verify = app.add_subcommand("verify-accuracy", "advection accuracy study at t = 2");
  verify->add_option("--n-list", nList, "comma-separated mesh sizes");
  verify->add_option("--precision", precision, "fp32 or fp64");
  verify->add_option("--parts", verifyParts, "number of partitions");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return run_command(runArgs);
    if (*part) return partition_command(mesh, n, parts, external, writeFile);
    if (*verify) return verify_accuracy_command(nList, precision, verifyParts);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
