#pragma once

#include <string>

#include "dipsmc/estimates.hpp"
#include "dipsmc/kernels.hpp"
#include "dipsmc/sampler.hpp"
#include "dipsmc/state.hpp"
#include "dipsmc/synthgen.hpp"

namespace dipsmc {

struct GeometryConfig {
  double conductor_radius = 0.09;  // m
  double shell_radius = 0.07;      // m; source cells stay inside this ball
  double spacing = 0.005;          // m
  double helmet_radius = 0.12;     // m
  int n_sensors = 100;
};

struct NoiseConfig {
  double sigma = 1e-14;  // T; must stay at or above the NoiseModel floor
};

struct EstimateConfig {
  double peak_radius = 0.01;  // m; separation enforced between intensity peaks
};

/// Every tunable parameter of the pipeline, grouped per module.  JSON
/// configs may set any subset; unset keys keep these defaults.
struct RunConfig {
  GeometryConfig geometry;
  PriorParams prior;
  NoiseConfig noise;
  MoveParams moves;
  AdaptConfig adapt;
  SuiteSpec suite;
  EstimateConfig estimate;
};

RunConfig default_config();

/// Parses a JSON config document.  Unknown keys are rejected with a
/// ConfigError naming every offender (e.g. "geometry.foo"); out-of-range
/// values are rejected with a ConfigError naming the key.  `where` labels
/// error messages (normally the file path).
RunConfig parse_config_text(const std::string& text, const std::string& where);

/// Reads and parses a JSON config file.
RunConfig load_config(const std::string& path);

/// Serializes a config with every key present (pretty-printed JSON).
std::string config_json(const RunConfig& cfg);

}  // namespace dipsmc
