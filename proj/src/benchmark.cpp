#include "pmc/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "pmc/io.hpp"

namespace pmc {

RunPlan default_benchmark_plan() {
  RunPlan plan;
  plan.target_spec = "mix9d";
  plan.exploration.n_chains = 300;
  plan.exploration.samples_per_chain = 400;
  // long calibration prefix: retained points then sit mostly on the modes,
  // which keeps the marginal clusters crisp for the cut placement
  plan.exploration.proposal_init_fraction = 0.5;
  plan.subspace.n_chains = 10;
  plan.subspace.mode = SubspaceRunConfig::Mode::wall_clock;
  plan.min_rel_gain = 0.0;  // the grid pins the leaf count via S
  return plan;
}

std::vector<BenchmarkRow> run_benchmark_grid(const BenchmarkGrid& grid,
                                             std::ostream* progress) {
  grid.validate();

  // S=1 first so every (budget, rep) has its rate baseline available.
  std::vector<std::size_t> order(grid.subspace_counts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return (grid.subspace_counts[a] == 1) > (grid.subspace_counts[b] == 1);
  });

  std::map<std::pair<std::size_t, std::size_t>, RunTiming> baselines;
  std::vector<BenchmarkRow> rows(grid.subspace_counts.size() *
                                 grid.budgets_seconds.size() *
                                 grid.repetitions);

  for (std::size_t oi : order) {
    std::size_t s = grid.subspace_counts[oi];
    for (std::size_t bi = 0; bi < grid.budgets_seconds.size(); ++bi) {
      for (std::size_t rep = 0; rep < grid.repetitions; ++rep) {
        std::size_t flat =
            (oi * grid.budgets_seconds.size() + bi) * grid.repetitions + rep;

        RunPlan plan = grid.base;
        plan.max_subspaces = s;
        plan.subspace.mode = SubspaceRunConfig::Mode::wall_clock;
        plan.subspace.wall_clock_seconds = grid.budgets_seconds[bi];
        plan.seed = derive_seed(grid.seed, StreamKind::benchmark, flat);

        BenchmarkRow row;
        row.subspaces = s;
        row.budget_seconds = grid.budgets_seconds[bi];
        row.rep = rep;
        row.seed = plan.seed;
        row.sampling_rate = std::numeric_limits<double>::quiet_NaN();
        row.per_chain_rate = std::numeric_limits<double>::quiet_NaN();
        RunTiming t;
        try {
          RunResult result = run_pipeline(plan);
          t = result.timing();
          row.n_samples = result.samples.size();
          row.max_subspace_wall_seconds = t.max_wall;
          row.sum_subspace_cpu_seconds = t.sum_cpu;
          row.integral = result.samples.total_integral.value;
          row.integral_std_error = result.samples.total_integral.std_error;
          row.degraded = result.degraded;
          if (result.samples.size() > 0 && !result.ess.n_eff.empty()) {
            row.mean_neff_fraction =
                result.ess.n_eff_mean / double(result.samples.size());
            row.std_neff_fraction =
                result.ess.n_eff_std / double(result.samples.size());
          }
        } catch (const std::exception&) {
          row.degraded = true;  // failure recorded, grid continues
        }
        if (s == 1) baselines[{bi, rep}] = t;
        auto base = baselines.find({bi, rep});
        if (base != baselines.end() && t.n_samples > 0) {
          // CPU accounting can quantize short tasks to zero; rates are
          // then unavailable rather than fabricated
          try {
            RateReport rr = rate_report(base->second, t);
            row.sampling_rate = rr.sampling_rate;
            row.per_chain_rate = rr.per_chain_rate;
          } catch (const std::invalid_argument&) {
          }
        }
        rows[flat] = row;
        if (progress)
          (*progress) << "S=" << s << " budget=" << grid.budgets_seconds[bi]
                      << "s rep=" << rep << " N=" << row.n_samples
                      << " integral=" << row.integral << "\n";
      }
    }
  }
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "# schema=1\n"
      << "S,budget_seconds,rep,seed,n_samples,max_subspace_wall_seconds,"
         "sum_subspace_cpu_seconds,integral,integral_std_error,degraded,"
         "mean_neff_fraction,std_neff_fraction,sampling_rate,per_chain_rate\n";
  for (const BenchmarkRow& r : rows) {
    out << r.subspaces << "," << format_double(r.budget_seconds) << "," << r.rep
        << "," << r.seed << "," << r.n_samples << ","
        << format_double(r.max_subspace_wall_seconds) << ","
        << format_double(r.sum_subspace_cpu_seconds) << ","
        << format_double(r.integral) << ","
        << format_double(r.integral_std_error) << "," << (r.degraded ? 1 : 0)
        << "," << format_double(r.mean_neff_fraction) << ","
        << format_double(r.std_neff_fraction) << ","
        << format_double(r.sampling_rate) << ","
        << format_double(r.per_chain_rate) << "\n";
  }
  return out.str();
}

}  // namespace pmc
