#include "dipsmc/serialize.hpp"

#include <cmath>
#include <sstream>

#include "dipsmc/errors.hpp"
#include "dipsmc/textio.hpp"

namespace dipsmc {

nlohmann::ordered_json source_config_to_json(const SourceConfig& config) {
  nlohmann::ordered_json j;
  j["dipoles"] = nlohmann::ordered_json::array();
  for (const auto& d : config.dipoles()) {
    j["dipoles"].push_back(
        {{"cell", d.cell}, {"z", d.z}, {"phi", d.phi}, {"q", d.q}});
  }
  return j;
}

SourceConfig source_config_from_json(const nlohmann::json& j) {
  try {
    std::vector<Dipole> dipoles;
    for (const auto& dj : j.at("dipoles")) {
      Dipole d;
      d.cell = dj.at("cell").get<int>();
      d.z = dj.at("z").get<double>();
      d.phi = dj.at("phi").get<double>();
      d.q = dj.at("q").get<double>();
      dipoles.push_back(d);
    }
    return SourceConfig(std::move(dipoles));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed source configuration JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid source configuration: ") + e.what());
  }
}

void save_source_config(const SourceConfig& config, const std::string& path) {
  textio::write_file(path, source_config_to_json(config).dump(2) + "\n");
}

SourceConfig load_source_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(textio::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse JSON file " + path + ": " + e.what());
  }
  return source_config_from_json(j);
}

nlohmann::ordered_json estimate_to_json(const EstimatedConfig& est) {
  nlohmann::ordered_json j;
  j["n"] = est.n_hat;
  j["sources"] = nlohmann::ordered_json::array();
  for (const auto& s : est.sources) {
    j["sources"].push_back({{"cell", s.cell},
                            {"r", {s.r.x(), s.r.y(), s.r.z()}},
                            {"moment", {s.moment.x(), s.moment.y(), s.moment.z()}},
                            {"intensity", s.intensity}});
  }
  return j;
}

EstimatedConfig estimate_from_json(const nlohmann::json& j) {
  try {
    EstimatedConfig est;
    est.n_hat = j.at("n").get<int>();
    for (const auto& sj : j.at("sources")) {
      EstimatedSource s;
      s.cell = sj.at("cell").get<int>();
      for (int k = 0; k < 3; ++k) {
        s.r[k] = sj.at("r").at(k).get<double>();
        s.moment[k] = sj.at("moment").at(k).get<double>();
      }
      s.intensity = sj.at("intensity").get<double>();
      est.sources.push_back(s);
    }
    return est;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed estimate JSON: ") + e.what());
  }
}

std::string history_csv(const SamplerOutput& out, int max_dipoles) {
  std::ostringstream csv;
  csv << "i,f,delta,ess";
  for (int k = 0; k <= max_dipoles; ++k) csv << ",p_nd" << k;
  csv << '\n';
  for (const auto& rec : out.history) {
    csv << rec.iteration << ',' << textio::fmt_g17(rec.f) << ',' << textio::fmt_g17(rec.delta)
        << ',' << textio::fmt_g17(rec.ess);
    for (double p : rec.posterior_nd) csv << ',' << textio::fmt_g17(p);
    csv << '\n';
  }
  return csv.str();
}

nlohmann::ordered_json sampler_output_json(const SamplerOutput& out, const EstimatedConfig& est,
                                           int max_dipoles) {
  nlohmann::ordered_json j;
  j["seed"] = out.seed;
  j["n_particles"] = out.ensemble.particles.size();
  j["n_iterations"] = out.history.size();
  j["final_f"] = out.ensemble.f;

  nlohmann::ordered_json h;
  auto col = [&](auto getter) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& rec : out.history) arr.push_back(getter(rec));
    return arr;
  };
  h["iteration"] = col([](const IterationRecord& r) { return r.iteration; });
  h["f"] = col([](const IterationRecord& r) { return r.f; });
  h["delta"] = col([](const IterationRecord& r) { return r.delta; });
  h["ess"] = col([](const IterationRecord& r) { return r.ess; });
  h["ess_ratio"] = col([](const IterationRecord& r) { return r.ess_ratio; });
  h["ess_post"] = col([](const IterationRecord& r) { return r.ess_post; });
  h["resampled"] = col([](const IterationRecord& r) { return r.resampled; });
  h["delta_at_boundary"] = col([](const IterationRecord& r) { return r.at_boundary; });
  h["terminal"] = col([](const IterationRecord& r) { return r.terminal; });
  // non-finite sigma (f = 0) serializes as null by design
  h["sigma_i"] = col([](const IterationRecord& r) { return r.sigma_i; });
  h["posterior_nd"] = col([](const IterationRecord& r) { return r.posterior_nd; });
  j["history"] = std::move(h);

  nlohmann::ordered_json pmf = nlohmann::ordered_json::array();
  if (!out.history.empty())
    for (double p : out.history.back().posterior_nd) pmf.push_back(p);
  j["posterior_nd"] = std::move(pmf);
  j["estimate"] = estimate_to_json(est);
  j["estimate_shortfall"] = est.shortfall;
  (void)max_dipoles;
  return j;
}

}  // namespace dipsmc
