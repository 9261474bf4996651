#include "pmc/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pmc {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

void write_samples_csv(const WeightedSampleSet& ws, std::ostream& out) {
  out << "# schema=1\n";
  const std::size_t m = ws.samples.cols();
  for (std::size_t d = 0; d < m; ++d) out << "x" << d << ",";
  out << "weight,log_density,subspace_id,chain_id\n";
  for (std::size_t i = 0; i < ws.size(); ++i) {
    for (std::size_t d = 0; d < m; ++d)
      out << format_double(ws.samples(i, d)) << ",";
    out << format_double(ws.weights[i]) << ","
        << format_double(ws.log_densities[i]) << "," << ws.subspace_ids[i]
        << "," << ws.chain_ids[i] << "\n";
  }
}

void write_samples_csv(const WeightedSampleSet& ws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_samples_csv(ws, out);
}

std::string samples_csv_string(const WeightedSampleSet& ws) {
  std::ostringstream out;
  write_samples_csv(ws, out);
  return out.str();
}

WeightedSampleSet read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# schema=", 0) != 0)
    throw std::runtime_error(path + ": missing '# schema=' header line");
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": missing column header");

  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
  }
  if (cols.size() < 5)
    throw std::runtime_error(path + ": expected coordinate columns plus "
                                    "weight,log_density,subspace_id,chain_id");
  const std::size_t m = cols.size() - 4;
  for (std::size_t d = 0; d < m; ++d)
    if (cols[d] != "x" + std::to_string(d))
      throw std::runtime_error(path + ": unexpected column '" + cols[d] + "'");

  WeightedSampleSet ws;
  ws.samples = Matrix(0, m);
  std::vector<double> row(m);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
    if (parts.size() != cols.size())
      throw std::runtime_error(path + ": bad row width");
    for (std::size_t d = 0; d < m; ++d) row[d] = std::stod(parts[d]);
    ws.samples.push_row(row);
    ws.weights.push_back(std::stod(parts[m]));
    ws.log_densities.push_back(std::stod(parts[m + 1]));
    ws.subspace_ids.push_back(std::uint32_t(std::stoul(parts[m + 2])));
    ws.chain_ids.push_back(std::uint32_t(std::stoul(parts[m + 3])));
  }
  double total = 0.0;
  for (double w : ws.weights) total += w;
  ws.total_integral.value = total;
  ws.total_integral.method = "sum-of-weights";
  return ws;
}

namespace {

nlohmann::json box_json(const ParameterBox& b) {
  return {{"lower", b.lower}, {"upper", b.upper}};
}

nlohmann::json ess_json(const EssReport& e) {
  return {{"tau", e.tau},
          {"n_eff", e.n_eff},
          {"flagged", e.flagged},
          {"n_eff_mean", e.n_eff_mean},
          {"n_eff_std", e.n_eff_std},
          {"n_samples", e.n_samples}};
}

}  // namespace

nlohmann::json manifest_json(const RunResult& r) {
  const RunPlan& p = r.plan;
  nlohmann::json config{
      {"target", p.target_spec},
      {"seed", p.seed},
      {"explore_chains", p.exploration.n_chains},
      {"explore_samples_per_chain", p.exploration.samples_per_chain},
      {"proposal_init_fraction", p.exploration.proposal_init_fraction},
      {"max_subspaces", p.max_subspaces},
      {"min_rel_gain", p.min_rel_gain},
      {"partition_axes", p.partition_axes},
      {"chains_per_subspace", p.subspace.n_chains},
      {"mode", p.subspace.mode == SubspaceRunConfig::Mode::fixed_count
                   ? "fixed-count"
                   : "wall-clock"},
      {"samples_per_chain", p.subspace.samples_per_chain},
      {"wall_clock_seconds", p.subspace.wall_clock_seconds},
      {"wallclock_max_samples_per_chain",
       p.subspace.wallclock_max_samples_per_chain},
      {"burnin_max_cycles", p.subspace.burnin_max_cycles},
      {"burnin_window", p.subspace.burnin_window},
      {"accept_window", {p.subspace.target_accept_lo, p.subspace.target_accept_hi}},
      {"rhat", p.subspace.rhat_threshold},
      {"adapt_kappa", p.subspace.adapt_kappa},
      {"adapt_center", p.subspace.adapt_center},
      {"integrator", p.integrator},
      {"integrator_min_samples", p.integrator_cfg.min_samples},
      {"integrator_mass_fraction", p.integrator_cfg.mass_fraction},
      {"integrator_max_density_ratio", p.integrator_cfg.max_density_ratio},
      {"executor", p.executor},
      {"workers", p.worker_count},
      {"ess_max_lag", p.ess_max_lag},
      {"out_dir", p.out_dir},
  };

  nlohmann::json subs = nlohmann::json::array();
  for (const SubspaceReport& s : r.subspaces) {
    nlohmann::json js{{"index", s.index},
                      {"box", box_json(s.box)},
                      {"n_samples", s.n_samples},
                      {"exploration_count", s.exploration_count},
                      {"converged", s.converged},
                      {"failed", s.failed},
                      {"wall_seconds", s.wall_seconds},
                      {"cpu_seconds", s.cpu_seconds},
                      {"sampling_wall_seconds", s.sampling_wall_seconds}};
    if (s.failed) {
      js["error"] = s.error;
    } else {
      js["integral"] = {{"value", s.integral.value},
                        {"std_error", s.integral.std_error},
                        {"method", s.integral.method},
                        {"n_used", s.integral.n_used},
                        {"region", box_json(s.integral.region)}};
    }
    subs.push_back(std::move(js));
  }

  RunTiming t = r.timing();
  double sum_weights = 0.0;
  for (double w : r.samples.weights) sum_weights += w;

  nlohmann::json j{
      {"schema", 1},
      {"target", {{"name", r.target_name},
                  {"dim", r.dim},
                  {"box", box_json(r.support)}}},
      {"config", std::move(config)},
      {"n_subspaces", r.tree.leaves().size()},
      {"subspaces", std::move(subs)},
      {"n_samples", r.samples.size()},
      {"sum_weights", sum_weights},
      {"integral", {{"value", r.samples.total_integral.value},
                    {"std_error", r.samples.total_integral.std_error}}},
      {"timings", {{"exploration_seconds", r.exploration_seconds},
                   {"tree_seconds", r.tree_seconds},
                   {"max_subspace_wall_seconds", t.max_wall},
                   {"sum_subspace_cpu_seconds", t.sum_cpu}}},
      {"degraded", r.degraded},
      {"pipeline_failed", r.pipeline_failed},
      {"warnings", r.warnings},
  };
  if (!r.ess.n_eff.empty()) j["ess"] = ess_json(r.ess);
  if (!r.ess_per_chain.n_eff.empty())
    j["ess_per_chain"] = ess_json(r.ess_per_chain);
  return j;
}

void write_manifest(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << manifest_json(result).dump(2) << "\n";
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return nlohmann::json::parse(in);
}

RunTiming timing_from_manifest(const nlohmann::json& manifest) {
  if (!manifest.contains("timings") || !manifest.contains("n_samples"))
    throw std::runtime_error("manifest missing timing information");
  RunTiming t;
  t.n_samples = manifest.at("n_samples").get<double>();
  t.max_wall =
      manifest.at("timings").at("max_subspace_wall_seconds").get<double>();
  t.sum_cpu =
      manifest.at("timings").at("sum_subspace_cpu_seconds").get<double>();
  return t;
}

void write_ess_csv(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema=1\n"
      << "dim,tau,n_eff,n_eff_fraction,flagged\n";
  const EssReport& e = result.ess;
  for (std::size_t d = 0; d < e.n_eff.size(); ++d) {
    double frac = e.n_samples > 0 ? e.n_eff[d] / double(e.n_samples) : 0.0;
    out << d << "," << format_double(e.tau[d]) << ","
        << format_double(e.n_eff[d]) << "," << format_double(frac) << ","
        << (e.flagged[d] ? 1 : 0) << "\n";
  }
}

std::string write_run_artifacts(const RunResult& result) {
  const std::string& dir = result.plan.out_dir;
  if (dir.empty()) throw std::invalid_argument("write_run_artifacts: no out_dir");
  std::filesystem::create_directories(dir);
  if (!result.pipeline_failed) {
    write_samples_csv(result.samples, dir + "/samples.csv");
    if (!result.ess.n_eff.empty()) write_ess_csv(result, dir + "/ess.csv");
  }
  {
    std::ofstream out(dir + "/tree.json");
    if (!out) throw std::runtime_error("cannot write " + dir + "/tree.json");
    out << result.tree.to_json() << "\n";
  }
  std::string manifest_path = dir + "/manifest.json";
  write_manifest(result, manifest_path);
  return manifest_path;
}

}  // namespace pmc
