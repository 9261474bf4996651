#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmc/diagnostics.hpp"
#include "pmc/exploration.hpp"
#include "pmc/integration.hpp"
#include "pmc/mh.hpp"
#include "pmc/partition.hpp"
#include "pmc/stitching.hpp"
#include "pmc/target.hpp"

namespace pmc {

struct RunPlan {
  std::string target_spec;  // catalog name or JSON spec path
  std::uint64_t seed = 1;

  ExplorationConfig exploration;

  std::size_t max_subspaces = 1;
  double min_rel_gain = 0.01;
  std::vector<std::size_t> partition_axes;  // empty = all axes

  SubspaceRunConfig subspace;

  std::string integrator = "harmonic-region";
  IntegratorConfig integrator_cfg;

  std::string executor = "openmp";
  int worker_count = 0;  // 0 = hardware concurrency

  std::size_t ess_max_lag = 4096;

  std::string out_dir;  // empty: no artifacts written by the CLI

  void validate() const {
    if (target_spec.empty())
      throw std::invalid_argument("plan: field 'target' is required");
    if (max_subspaces < 1)
      throw std::invalid_argument("plan: max_subspaces must be >= 1");
    exploration.validate();
    subspace.validate();
  }
};

struct SubspaceReport {
  std::size_t index = 0;
  ParameterBox box;
  std::size_t n_samples = 0;
  std::size_t exploration_count = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
  double wall_seconds = 0.0;  // sampling + integration
  double cpu_seconds = 0.0;
  double sampling_wall_seconds = 0.0;
  IntegralEstimate integral;
};

struct RunResult {
  RunPlan plan;
  std::string target_name;
  std::size_t dim = 0;
  ParameterBox support;

  PartitionTree tree;
  WeightedSampleSet samples;
  std::vector<SubspaceReport> subspaces;

  EssReport ess;           // stitched-order series per dimension
  EssReport ess_per_chain; // per-(subspace,chain) sum variant

  double exploration_seconds = 0.0;
  double tree_seconds = 0.0;

  bool degraded = false;        // at least one subspace failed or was empty
  bool pipeline_failed = false; // no subspace delivered samples
  std::vector<std::string> warnings;

  /// Inputs for the sampling-rate ratios (exploration and tree excluded).
  RunTiming timing() const;
};

std::uint64_t derive_subspace_seed(std::uint64_t master, std::size_t index);

/// Effective worker count: the PARTITION_MCMC_WORKERS environment variable
/// overrides the plan.
int resolve_worker_count(const RunPlan& plan);

/// Full pipeline: explore, partition, per-subspace sample+integrate on the
/// executor, stitch, diagnostics. Subspace failures degrade the run rather
/// than aborting it; `pipeline_failed` is set when nothing survived.
RunResult run_pipeline(const RunPlan& plan);

}  // namespace pmc
