#pragma once

#include <string>

#include <json.hpp>

#include "dipsmc/estimates.hpp"
#include "dipsmc/sampler.hpp"
#include "dipsmc/state.hpp"

namespace dipsmc {

/// {"dipoles": [{"cell", "z", "phi", "q"}, ...]}, cells ascending.
nlohmann::ordered_json source_config_to_json(const SourceConfig& config);
SourceConfig source_config_from_json(const nlohmann::json& j);
void save_source_config(const SourceConfig& config, const std::string& path);
SourceConfig load_source_config(const std::string& path);

/// {"n": int, "sources": [{"cell", "r", "moment", "intensity"}, ...]}.
nlohmann::ordered_json estimate_to_json(const EstimatedConfig& est);
EstimatedConfig estimate_from_json(const nlohmann::json& j);

/// Per-iteration CSV: i, f, delta, ess, and the dipole-count pmf columns.
std::string history_csv(const SamplerOutput& out, int max_dipoles);

/// Full sampler result: parameters echo, history arrays, final count pmf and
/// point estimate.  Excludes wall time so reruns are byte-identical.
nlohmann::ordered_json sampler_output_json(const SamplerOutput& out, const EstimatedConfig& est,
                                           int max_dipoles);

}  // namespace dipsmc
