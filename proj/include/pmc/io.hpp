#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "pmc/orchestrator.hpp"
#include "pmc/stitching.hpp"

namespace pmc {

/// Scientific notation with 12 significant digits after the point.
std::string format_double(double v);

/// Samples CSV, schema 1: one row per sample with the coordinates, weight,
/// log density, subspace id and chain id.
void write_samples_csv(const WeightedSampleSet& ws, std::ostream& out);
void write_samples_csv(const WeightedSampleSet& ws, const std::string& path);
std::string samples_csv_string(const WeightedSampleSet& ws);

WeightedSampleSet read_samples_csv(const std::string& path);

nlohmann::json manifest_json(const RunResult& result);
void write_manifest(const RunResult& result, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

/// Flat per-dimension diagnostics table (one row per dimension) for
/// external plotting.
void write_ess_csv(const RunResult& result, const std::string& path);

/// Rate inputs from a stored manifest; throws when timing is missing.
RunTiming timing_from_manifest(const nlohmann::json& manifest);

/// Writes samples CSV, manifest JSON and tree JSON under the plan's
/// out_dir (created if needed). Returns the manifest path.
std::string write_run_artifacts(const RunResult& result);

}  // namespace pmc
