#include "dipsmc/config.hpp"

#include <cmath>
#include <set>
#include <vector>

#include <json.hpp>

#include "dipsmc/errors.hpp"
#include "dipsmc/textio.hpp"

namespace dipsmc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

/// Walks one config section, pulling known keys and recording unknown ones.
class Section {
 public:
  Section(const json& j, std::string prefix, std::vector<std::string>& unknown)
      : j_(j), prefix_(std::move(prefix)), unknown_(unknown) {
    if (!j_.is_object()) throw ConfigError("config section '" + name() + "' must be an object");
  }

  ~Section() {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) unknown_.push_back(prefix_ + it.key());
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + prefix_ + key + "' has the wrong type");
    }
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  bool has(const char* key) const { return j_.contains(key); }

 private:
  std::string name() const {
    return prefix_.empty() ? std::string("<root>") : prefix_.substr(0, prefix_.size() - 1);
  }

  const json& j_;
  std::string prefix_;
  std::vector<std::string>& unknown_;
  std::set<std::string> seen_;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "' " + what);
}

void validate(const RunConfig& c) {
  const auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) bad_value(key, "must be positive and finite");
  };
  positive(c.geometry.conductor_radius, "geometry.conductor_radius");
  positive(c.geometry.shell_radius, "geometry.shell_radius");
  positive(c.geometry.spacing, "geometry.spacing");
  positive(c.geometry.helmet_radius, "geometry.helmet_radius");
  if (c.geometry.n_sensors < 1) bad_value("geometry.n_sensors", "must be at least 1");

  positive(c.prior.lambda, "prior.lambda");
  positive(c.prior.strength_scale, "prior.strength_scale");
  positive(c.prior.strength_decades, "prior.strength_decades");
  if (c.prior.max_dipoles < 0) bad_value("prior.max_dipoles", "must be non-negative");

  if (!(c.noise.sigma > 0.0) || !std::isfinite(c.noise.sigma))
    bad_value("noise.sigma", "must be positive and finite");

  if (!(c.moves.p_birth > 0.0)) bad_value("moves.p_birth", "must be positive");
  if (!(c.moves.p_death > 0.0)) bad_value("moves.p_death", "must be positive");
  if (!(c.moves.p_birth + c.moves.p_death <= 1.0))
    bad_value("moves.p_birth", "plus moves.p_death must not exceed 1");
  positive(c.moves.dir_sd, "moves.dir_sd");
  positive(c.moves.strength_sd_factor, "moves.strength_sd_factor");
  positive(c.moves.neighbor_radius, "moves.neighbor_radius");
  positive(c.moves.loc_gauss_sd, "moves.loc_gauss_sd");

  if (c.adapt.n_particles < 2) bad_value("adapt.n_particles", "must be at least 2");
  if (!(c.adapt.delta_min > 0.0 && c.adapt.delta_min < c.adapt.delta_max &&
        c.adapt.delta_max <= 1.0))
    bad_value("adapt.delta_min", "and adapt.delta_max must satisfy 0 < min < max <= 1");
  if (!(c.adapt.ess_ratio_min > 0.0 && c.adapt.ess_ratio_min < c.adapt.ess_ratio_max &&
        c.adapt.ess_ratio_max < 1.0))
    bad_value("adapt.ess_ratio_min", "and adapt.ess_ratio_max must satisfy 0 < min < max < 1");
  if (!(c.adapt.resample_fraction > 0.0 && c.adapt.resample_fraction <= 1.0))
    bad_value("adapt.resample_fraction", "must lie in (0, 1]");
  if (c.adapt.bisection_max_iters < 1) bad_value("adapt.bisection_max_iters", "must be >= 1");

  if (c.suite.strengths.empty()) bad_value("suite.strengths", "must be a non-empty array");
  for (double s : c.suite.strengths)
    if (!(s > 0.0) || !std::isfinite(s)) bad_value("suite.strengths", "entries must be positive");
  if (c.suite.noise_multipliers.empty())
    bad_value("suite.noise_multipliers", "must be a non-empty array");
  for (double m : c.suite.noise_multipliers)
    if (!(m >= 0.0) || !std::isfinite(m))
      bad_value("suite.noise_multipliers", "entries must be non-negative");
  if (c.suite.n_groups < 1) bad_value("suite.n_groups", "must be at least 1");

  positive(c.estimate.peak_radius, "estimate.peak_radius");
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config_text(const std::string& text, const std::string& where) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(where + ": config root must be a JSON object");

  RunConfig cfg;
  std::vector<std::string> unknown;
  {
    Section root(doc, "", unknown);
    if (root.has("geometry")) {
      Section s(root.raw("geometry"), "geometry.", unknown);
      s.get("conductor_radius", cfg.geometry.conductor_radius);
      s.get("shell_radius", cfg.geometry.shell_radius);
      s.get("spacing", cfg.geometry.spacing);
      s.get("helmet_radius", cfg.geometry.helmet_radius);
      s.get("n_sensors", cfg.geometry.n_sensors);
    }
    if (root.has("prior")) {
      Section s(root.raw("prior"), "prior.", unknown);
      s.get("lambda", cfg.prior.lambda);
      s.get("strength_scale", cfg.prior.strength_scale);
      s.get("strength_decades", cfg.prior.strength_decades);
      s.get("max_dipoles", cfg.prior.max_dipoles);
    }
    if (root.has("noise")) {
      Section s(root.raw("noise"), "noise.", unknown);
      s.get("sigma", cfg.noise.sigma);
    }
    if (root.has("moves")) {
      Section s(root.raw("moves"), "moves.", unknown);
      s.get("p_birth", cfg.moves.p_birth);
      s.get("p_death", cfg.moves.p_death);
      s.get("dir_sd", cfg.moves.dir_sd);
      s.get("strength_sd_factor", cfg.moves.strength_sd_factor);
      s.get("neighbor_radius", cfg.moves.neighbor_radius);
      s.get("loc_gauss_sd", cfg.moves.loc_gauss_sd);
    }
    if (root.has("adapt")) {
      Section s(root.raw("adapt"), "adapt.", unknown);
      s.get("n_particles", cfg.adapt.n_particles);
      s.get("delta_min", cfg.adapt.delta_min);
      s.get("delta_max", cfg.adapt.delta_max);
      s.get("ess_ratio_min", cfg.adapt.ess_ratio_min);
      s.get("ess_ratio_max", cfg.adapt.ess_ratio_max);
      s.get("resample_fraction", cfg.adapt.resample_fraction);
      s.get("bisection_max_iters", cfg.adapt.bisection_max_iters);
    }
    if (root.has("suite")) {
      Section s(root.raw("suite"), "suite.", unknown);
      s.get("strengths", cfg.suite.strengths);
      s.get("noise_multipliers", cfg.suite.noise_multipliers);
      s.get("n_groups", cfg.suite.n_groups);
    }
    if (root.has("estimate")) {
      Section s(root.raw("estimate"), "estimate.", unknown);
      s.get("peak_radius", cfg.estimate.peak_radius);
    }
  }

  if (!unknown.empty()) {
    std::string msg = where + ": unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return parse_config_text(textio::read_file(path), path);
}

std::string config_json(const RunConfig& c) {
  ordered_json j;
  j["geometry"] = {{"conductor_radius", c.geometry.conductor_radius},
                   {"shell_radius", c.geometry.shell_radius},
                   {"spacing", c.geometry.spacing},
                   {"helmet_radius", c.geometry.helmet_radius},
                   {"n_sensors", c.geometry.n_sensors}};
  j["prior"] = {{"lambda", c.prior.lambda},
                {"strength_scale", c.prior.strength_scale},
                {"strength_decades", c.prior.strength_decades},
                {"max_dipoles", c.prior.max_dipoles}};
  j["noise"] = {{"sigma", c.noise.sigma}};
  j["moves"] = {{"p_birth", c.moves.p_birth},
                {"p_death", c.moves.p_death},
                {"dir_sd", c.moves.dir_sd},
                {"strength_sd_factor", c.moves.strength_sd_factor},
                {"neighbor_radius", c.moves.neighbor_radius},
                {"loc_gauss_sd", c.moves.loc_gauss_sd}};
  j["adapt"] = {{"n_particles", c.adapt.n_particles},
                {"delta_min", c.adapt.delta_min},
                {"delta_max", c.adapt.delta_max},
                {"ess_ratio_min", c.adapt.ess_ratio_min},
                {"ess_ratio_max", c.adapt.ess_ratio_max},
                {"resample_fraction", c.adapt.resample_fraction},
                {"bisection_max_iters", c.adapt.bisection_max_iters}};
  j["suite"] = {{"strengths", c.suite.strengths},
                {"noise_multipliers", c.suite.noise_multipliers},
                {"n_groups", c.suite.n_groups}};
  j["estimate"] = {{"peak_radius", c.estimate.peak_radius}};
  return j.dump(2) + "\n";
}

}  // namespace dipsmc
