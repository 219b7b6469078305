// Command-line frontend: lead-field construction, benchmark-suite
// generation, single-topography sampling, suite benchmarking, and metric
// evaluation of existing outputs.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure (or unexpected exception).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dipsmc/config.hpp"
#include "dipsmc/errors.hpp"
#include "dipsmc/estimates.hpp"
#include "dipsmc/geometry.hpp"
#include "dipsmc/likelihood.hpp"
#include "dipsmc/metrics.hpp"
#include "dipsmc/sampler.hpp"
#include "dipsmc/serialize.hpp"
#include "dipsmc/state.hpp"
#include "dipsmc/synthgen.hpp"
#include "dipsmc/textio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  int particles = 0;  // 0: keep config value
  int groups = 0;     // 0: keep config value
  std::string out;
};

dipsmc::RunConfig resolve_config(const CommonArgs& args) {
  dipsmc::RunConfig cfg = args.config_path.empty() ? dipsmc::default_config()
                                                   : dipsmc::load_config(args.config_path);
  if (args.particles > 0) cfg.adapt.n_particles = args.particles;
  if (args.groups > 0) cfg.suite.n_groups = args.groups;
  return cfg;
}

dipsmc::SourceGrid grid_from(const dipsmc::RunConfig& cfg) {
  return dipsmc::build_spherical_grid(cfg.geometry.conductor_radius, cfg.geometry.shell_radius,
                                      cfg.geometry.spacing, cfg.moves.neighbor_radius,
                                      cfg.moves.loc_gauss_sd);
}

dipsmc::LeadField leadfield_for(const dipsmc::RunConfig& cfg, const dipsmc::SourceGrid& grid,
                                const std::string& path) {
  dipsmc::LeadField lf = dipsmc::load_leadfield(path);
  if (lf.n_cells() != grid.n_cells())
    throw dipsmc::DataError("lead-field " + path + " has " + std::to_string(lf.n_cells()) +
                            " cells but the configured grid has " +
                            std::to_string(grid.n_cells()));
  if (lf.n_sensors() != cfg.geometry.n_sensors)
    throw dipsmc::DataError("lead-field " + path + " has " + std::to_string(lf.n_sensors()) +
                            " sensors but the config expects " +
                            std::to_string(cfg.geometry.n_sensors));
  return lf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t per_topography_seed(std::uint64_t seed, const std::string& rel_path) {
  return mix64(seed ^ mix64(fnv1a64(rel_path)));
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec)
    throw dipsmc::DataError("cannot create directory " + parent.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// leadfield

int cmd_leadfield(const CommonArgs& args) {
  const dipsmc::RunConfig cfg = resolve_config(args);
  const dipsmc::SourceGrid grid = grid_from(cfg);
  const dipsmc::SensorArray sensors =
      dipsmc::build_sensor_array(cfg.geometry.n_sensors, cfg.geometry.helmet_radius);
  std::cerr << "[leadfield] " << grid.n_cells() << " cells x " << sensors.n_sensors()
            << " sensors\n";
  const dipsmc::LeadField lf = dipsmc::compute_leadfield(grid, sensors);

  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) throw dipsmc::DataError("cannot create directory " + args.out + ": " + ec.message());
  dipsmc::save_leadfield(lf, (fs::path(args.out) / "leadfield.bin").string());
  dipsmc::save_grid_csv(grid, (fs::path(args.out) / "grid.csv").string());
  dipsmc::save_sensors_csv(sensors, (fs::path(args.out) / "sensors.csv").string());
  std::cerr << "[leadfield] wrote " << args.out << "/{leadfield.bin,grid.csv,sensors.csv}\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const CommonArgs& args, const std::string& leadfield_path) {
  const dipsmc::RunConfig cfg = resolve_config(args);
  const dipsmc::SourceGrid grid = grid_from(cfg);
  const dipsmc::LeadField lf = leadfield_for(cfg, grid, leadfield_path);
  const dipsmc::Suite suite = dipsmc::generate_suite(args.seed, grid, lf, cfg.suite);
  dipsmc::save_suite(suite, args.out);
  std::cerr << "[gen] wrote " << suite.entries.size() << " topographies under " << args.out
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sample

int cmd_sample(const CommonArgs& args, const std::string& topo_path,
               const std::string& leadfield_path) {
  const dipsmc::RunConfig cfg = resolve_config(args);
  const dipsmc::SourceGrid grid = grid_from(cfg);
  const dipsmc::LeadField lf = leadfield_for(cfg, grid, leadfield_path);
  const dipsmc::Topography topo = dipsmc::load_topography_csv(topo_path);
  const dipsmc::NoiseModel noise(cfg.noise.sigma);

  const dipsmc::SamplerOutput out = dipsmc::run(args.seed, topo, lf, grid, noise, cfg.prior,
                                                cfg.moves, cfg.adapt);
  const dipsmc::EstimatedConfig est =
      dipsmc::point_estimate(out.ensemble, grid, cfg.prior, cfg.estimate.peak_radius);

  ensure_parent_dir(args.out);
  dipsmc::textio::write_file(
      args.out, dipsmc::sampler_output_json(out, est, cfg.prior.max_dipoles).dump(2) + "\n");
  dipsmc::textio::write_file(args.out + ".history.csv",
                             dipsmc::history_csv(out, cfg.prior.max_dipoles));
  std::cerr << "[sample] " << out.history.size() << " iterations in " << out.wall_time_s
            << " s; wrote " << args.out << " and " << args.out << ".history.csv\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchEntry {
  std::string file;
  std::string truth;
  int group = 0;
  int n_dipoles = 0;
  int noise_index = 0;
  double noise_multiplier = 0.0;
  double noise_sd = 0.0;
};

struct BenchRow {
  std::string file;
  int group = 0;
  int n_true = 0;
  int noise_index = 0;
  double noise_multiplier = 0.0;
  double delta_nd = 0.0;
  double delta_r_m = 0.0;
  bool delta_r_undefined = false;
};

std::vector<BenchEntry> load_manifest(const std::string& suite_dir) {
  const std::string path = (fs::path(suite_dir) / "manifest.json").string();
  json doc;
  try {
    doc = json::parse(dipsmc::textio::read_file(path));
  } catch (const json::exception& e) {
    throw dipsmc::DataError(path + ": invalid JSON: " + e.what());
  }
  std::vector<BenchEntry> entries;
  try {
    for (const auto& j : doc.at("entries")) {
      BenchEntry e;
      e.file = j.at("file").get<std::string>();
      e.truth = j.at("truth").get<std::string>();
      e.group = j.at("group").get<int>();
      e.n_dipoles = j.at("n_dipoles").get<int>();
      e.noise_index = j.at("noise_index").get<int>();
      e.noise_multiplier = j.at("noise_multiplier").get<double>();
      e.noise_sd = j.at("noise_sd").get<double>();
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw dipsmc::DataError(path + ": bad manifest: " + e.what());
  }
  std::sort(entries.begin(), entries.end(), [](const BenchEntry& a, const BenchEntry& b) {
    return std::tie(a.group, a.n_dipoles, a.noise_index) <
           std::tie(b.group, b.n_dipoles, b.noise_index);
  });
  return entries;
}

std::string results_header() {
  return "file,group,n_true,noise_index,noise_multiplier,delta_nd,delta_r_m,delta_r_undefined";
}

std::string results_row(const BenchRow& r) {
  using dipsmc::textio::fmt_g17;
  return r.file + "," + std::to_string(r.group) + "," + std::to_string(r.n_true) + "," +
         std::to_string(r.noise_index) + "," + fmt_g17(r.noise_multiplier) + "," +
         fmt_g17(r.delta_nd) + "," + fmt_g17(r.delta_r_m) + "," +
         (r.delta_r_undefined ? "1" : "0");
}

std::map<std::string, BenchRow> load_existing_rows(const std::string& path) {
  std::map<std::string, BenchRow> rows;
  if (!fs::exists(path)) return rows;
  const std::string text = dipsmc::textio::read_file(path);
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line_no == 1) continue;  // header
    const auto fields = dipsmc::textio::split_csv(line);
    if (fields.size() != 8)
      throw dipsmc::DataError(path + ":" + std::to_string(line_no) + ": expected 8 fields");
    const std::string where = path + ":" + std::to_string(line_no);
    BenchRow r;
    try {
      r.file = fields[0];
      r.group = std::stoi(fields[1]);
      r.n_true = std::stoi(fields[2]);
      r.noise_index = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw dipsmc::DataError(where + ": bad integer field");
    }
    r.noise_multiplier = dipsmc::textio::parse_double(fields[4], where + ": noise_multiplier");
    r.delta_nd = dipsmc::textio::parse_double(fields[5], where + ": delta_nd");
    r.delta_r_m = dipsmc::textio::parse_double(fields[6], where + ": delta_r_m");
    r.delta_r_undefined = fields[7] == "1";
    rows[r.file] = std::move(r);
  }
  return rows;
}

struct Agg {
  int n = 0;
  double sum = 0.0, sumsq = 0.0;

  void add(double v) {
    ++n;
    sum += v;
    sumsq += v * v;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double sd() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sumsq - n * m * m) / (n - 1)));
  }
};

int cmd_bench(const CommonArgs& args, const std::string& suite_dir,
              const std::string& leadfield_path, bool resume) {
  const dipsmc::RunConfig cfg = resolve_config(args);
  const dipsmc::SourceGrid grid = grid_from(cfg);
  const dipsmc::LeadField lf = leadfield_for(cfg, grid, leadfield_path);
  const std::vector<BenchEntry> entries = load_manifest(suite_dir);

  std::error_code ec;
  fs::create_directories(args.out, ec);
  if (ec) throw dipsmc::DataError("cannot create directory " + args.out + ": " + ec.message());
  const std::string results_path = (fs::path(args.out) / "results.csv").string();

  std::map<std::string, BenchRow> done;
  if (resume) done = load_existing_rows(results_path);

  std::vector<BenchRow> rows;
  for (const auto& entry : entries) {
    if (auto it = done.find(entry.file); it != done.end()) {
      rows.push_back(it->second);
      continue;
    }
    const dipsmc::Topography topo =
        dipsmc::load_topography_csv((fs::path(suite_dir) / entry.file).string());
    const dipsmc::SourceConfig truth =
        dipsmc::load_source_config((fs::path(suite_dir) / entry.truth).string());
    const dipsmc::NoiseModel noise(std::max(entry.noise_sd, dipsmc::NoiseModel::sigma_floor));
    const std::uint64_t run_seed = per_topography_seed(args.seed, entry.file);

    const auto t0 = std::chrono::steady_clock::now();
    const dipsmc::SamplerOutput out =
        dipsmc::run(run_seed, topo, lf, grid, noise, cfg.prior, cfg.moves, cfg.adapt);
    const dipsmc::EstimatedConfig est =
        dipsmc::point_estimate(out.ensemble, grid, cfg.prior, cfg.estimate.peak_radius);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    BenchRow r;
    r.file = entry.file;
    r.group = entry.group;
    r.n_true = entry.n_dipoles;
    r.noise_index = entry.noise_index;
    r.noise_multiplier = entry.noise_multiplier;
    r.delta_nd = dipsmc::delta_nd(est, truth);
    const dipsmc::DeltaR dr = dipsmc::delta_r(est, truth, grid);
    r.delta_r_m = dr.value;
    r.delta_r_undefined = dr.undefined;
    rows.push_back(r);

    std::cerr << "[bench] " << entry.file << ": delta_nd=" << r.delta_nd
              << " delta_r=" << r.delta_r_m * 1e3 << " mm (" << out.history.size()
              << " iters, " << secs << " s)\n";

    // checkpoint after every run so --resume can pick up mid-suite
    std::string text = results_header() + "\n";
    for (const auto& row : rows) text += results_row(row) + "\n";
    dipsmc::textio::write_file(results_path, text);
  }

  // rewrite in canonical (manifest) order even when everything was resumed
  std::string text = results_header() + "\n";
  for (const auto& row : rows) text += results_row(row) + "\n";
  dipsmc::textio::write_file(results_path, text);

  // long-format summary over (n_true, noise level)
  std::map<std::pair<int, int>, std::pair<Agg, Agg>> cells;  // (nd, noise) -> (dnd, dr)
  std::map<std::pair<int, int>, double> multiplier_of;
  for (const auto& row : rows) {
    auto& cell = cells[{row.n_true, row.noise_index}];
    cell.first.add(row.delta_nd);
    if (!row.delta_r_undefined) cell.second.add(row.delta_r_m);
    multiplier_of[{row.n_true, row.noise_index}] = row.noise_multiplier;
  }
  using dipsmc::textio::fmt_g17;
  std::string summary =
      "n_true,noise_index,noise_multiplier,n_runs,mean_delta_nd,sd_delta_nd,"
      "n_delta_r_defined,mean_delta_r_m,sd_delta_r_m\n";
  for (const auto& [key, aggs] : cells) {
    summary += std::to_string(key.first) + "," + std::to_string(key.second) + "," +
               fmt_g17(multiplier_of[key]) + "," + std::to_string(aggs.first.n) + "," +
               fmt_g17(aggs.first.mean()) + "," + fmt_g17(aggs.first.sd()) + "," +
               std::to_string(aggs.second.n) + "," + fmt_g17(aggs.second.mean()) + "," +
               fmt_g17(aggs.second.sd()) + "\n";
  }
  dipsmc::textio::write_file((fs::path(args.out) / "summary.csv").string(), summary);

  // Table-style block on stdout: rows = noise levels, columns = true counts
  std::vector<int> nds, noises;
  for (const auto& [key, aggs] : cells) {
    (void)aggs;
    if (std::find(nds.begin(), nds.end(), key.first) == nds.end()) nds.push_back(key.first);
    if (std::find(noises.begin(), noises.end(), key.second) == noises.end())
      noises.push_back(key.second);
  }
  std::sort(nds.begin(), nds.end());
  std::sort(noises.begin(), noises.end());
  for (int metric = 0; metric < 2; ++metric) {
    std::printf("%s\n", metric == 0 ? "delta_nd (mean +- sd)" : "delta_r [mm] (mean +- sd)");
    std::printf("%-10s", "noise");
    for (int nd : nds) std::printf("  %14s", ("n_true=" + std::to_string(nd)).c_str());
    std::printf("\n");
    for (int ni : noises) {
      double mult = 0.0;
      for (int nd : nds)
        if (auto it = multiplier_of.find({nd, ni}); it != multiplier_of.end()) mult = it->second;
      char label[32];
      std::snprintf(label, sizeof(label), "%g%%", mult * 100.0);
      std::printf("%-10s", label);
      for (int nd : nds) {
        auto it = cells.find({nd, ni});
        if (it == cells.end()) {
          std::printf("  %14s", "-");
          continue;
        }
        char buf[64];
        if (metric == 0)
          std::snprintf(buf, sizeof(buf), "%+.2f +- %.2f", it->second.first.mean(),
                        it->second.first.sd());
        else
          std::snprintf(buf, sizeof(buf), "%.1f +- %.1f", it->second.second.mean() * 1e3,
                        it->second.second.sd() * 1e3);
        std::printf("  %14s", buf);
      }
      std::printf("\n");
    }
    std::printf("\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const CommonArgs& args, const std::string& estimate_path,
             const std::string& truth_path) {
  const dipsmc::RunConfig cfg = resolve_config(args);
  const dipsmc::SourceGrid grid = grid_from(cfg);

  json doc;
  try {
    doc = json::parse(dipsmc::textio::read_file(estimate_path));
  } catch (const json::exception& e) {
    throw dipsmc::DataError(estimate_path + ": invalid JSON: " + e.what());
  }
  const dipsmc::EstimatedConfig est =
      dipsmc::estimate_from_json(doc.contains("estimate") ? doc.at("estimate") : doc);
  const dipsmc::SourceConfig truth = dipsmc::load_source_config(truth_path);

  ordered_json out;
  out["delta_nd"] = dipsmc::delta_nd(est, truth);
  const dipsmc::DeltaR dr = dipsmc::delta_r(est, truth, grid);
  out["delta_r_m"] = dr.value;
  out["delta_r_undefined"] = dr.undefined;
  const std::string text = out.dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  if (!args.out.empty()) {
    ensure_parent_dir(args.out);
    dipsmc::textio::write_file(args.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian multi-dipole localization for MEG topographies"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string leadfield_path, topo_path, suite_dir, estimate_path, truth_path;
  bool resume = false;

  const auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", args.config_path, "JSON config file (defaults when omitted)");
    sub->add_option("--seed", args.seed, "RNG seed")->capture_default_str();
    sub->add_option("--particles", args.particles, "override adapt.n_particles");
    sub->add_option("--groups", args.groups, "override suite.n_groups");
    auto* out = sub->add_option("--out", args.out, "output path");
    if (needs_out) out->required();
  };

  CLI::App* lead = app.add_subcommand("leadfield", "build grid, sensors and lead-field");
  add_common(lead, true);

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic benchmark suite");
  add_common(gen, true);
  gen->add_option("--leadfield", leadfield_path, "lead-field binary")->required();

  CLI::App* sample = app.add_subcommand("sample", "run the sampler on one topography");
  add_common(sample, true);
  sample->add_option("--topo", topo_path, "topography CSV")->required();
  sample->add_option("--leadfield", leadfield_path, "lead-field binary")->required();

  CLI::App* bench = app.add_subcommand("bench", "run the sampler over a suite and score it");
  add_common(bench, true);
  bench->add_option("--suite", suite_dir, "suite directory (with manifest.json)")->required();
  bench->add_option("--leadfield", leadfield_path, "lead-field binary")->required();
  bench->add_flag("--resume", resume, "reuse rows already present in results.csv");

  CLI::App* eval = app.add_subcommand("eval", "score an existing estimate against a truth");
  add_common(eval, false);
  eval->add_option("--estimate", estimate_path, "sampler output JSON or bare estimate JSON")
      ->required();
  eval->add_option("--truth", truth_path, "ground-truth configuration JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (lead->parsed()) return cmd_leadfield(args);
    if (gen->parsed()) return cmd_gen(args, leadfield_path);
    if (sample->parsed()) return cmd_sample(args, topo_path, leadfield_path);
    if (bench->parsed()) return cmd_bench(args, suite_dir, leadfield_path, resume);
    if (eval->parsed()) return cmd_eval(args, estimate_path, truth_path);
  } catch (const dipsmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dipsmc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dipsmc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
