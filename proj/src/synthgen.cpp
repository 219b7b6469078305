#include "dipsmc/synthgen.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "dipsmc/errors.hpp"
#include "dipsmc/serialize.hpp"
#include "dipsmc/textio.hpp"

namespace dipsmc {

namespace {

// stream-key prefixes: cell draws vs per-topography noise
constexpr std::uint64_t kCellTag = 0x53554954452D43ull;
constexpr std::uint64_t kNoiseTag = 0x53554954452D4Eull;

// cells whose lead-field is essentially zero (radial-only response near the
// centre) can never be seen and are excluded from truth draws
constexpr double kVisibleNorm = 1e-12;  // T per A*m, Frobenius

std::string noise_label(double multiplier) {
  const double pct = multiplier * 100.0;
  const double rounded = std::round(pct);
  if (std::abs(pct - rounded) < 1e-9) return std::to_string(static_cast<long long>(rounded));
  std::string s = textio::fmt_g17(pct);
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace

Vec3 max_signal_orientation(const LeadField& lf, int cell) {
  const Eigen::Matrix3Xd& g = lf.g(cell);
  if (g.norm() < kVisibleNorm)
    throw DataError("zero lead-field at cell " + std::to_string(cell));
  const Eigen::Matrix3d m = g * g.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m);
  Vec3 u = solver.eigenvectors().col(2);  // eigenvalues ascending
  if (u.z() < 0.0 || (u.z() == 0.0 && (u.y() < 0.0 || (u.y() == 0.0 && u.x() < 0.0)))) u = -u;
  return u;
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& b, double sd, rng::Stream& rng) {
  if (sd < 0.0) throw std::invalid_argument("noise sd must be non-negative");
  if (sd == 0.0) return b;
  Eigen::VectorXd out = b;
  for (Eigen::Index s = 0; s < out.size(); ++s) out[s] += sd * rng.normal();
  return out;
}

Suite generate_suite(std::uint64_t seed, const SourceGrid& grid, const LeadField& lf,
                     const SuiteSpec& spec) {
  if (spec.strengths.empty()) throw ConfigError("suite needs at least one strength");
  if (spec.n_groups < 1) throw ConfigError("suite needs at least one group");
  if (lf.n_cells() != grid.n_cells()) throw DataError("lead-field / grid cell mismatch");
  const int nd_max = static_cast<int>(spec.strengths.size());
  if (grid.n_cells() < nd_max) throw ConfigError("grid smaller than the suite dipole count");

  Suite suite;
  suite.seed = seed;
  suite.spec = spec;

  for (int g = 0; g < spec.n_groups; ++g) {
    auto cell_rng = rng::make_stream(seed, {kCellTag, static_cast<std::uint64_t>(g)});
    std::vector<Dipole> dipoles;
    for (int d = 0; d < nd_max; ++d) {
      int cell;
      bool ok;
      do {
        cell = static_cast<int>(cell_rng.uniform_int(static_cast<std::uint64_t>(grid.n_cells())));
        ok = lf.g(cell).norm() >= kVisibleNorm;
        for (const auto& prev : dipoles) ok = ok && prev.cell != cell;
      } while (!ok);
      const Vec3 u = max_signal_orientation(lf, cell);
      const CanonicalOrientation co = canonical_orientation(u);
      dipoles.push_back({cell, co.z, co.phi,
                         co.flipped ? -spec.strengths[static_cast<std::size_t>(d)]
                                    : spec.strengths[static_cast<std::size_t>(d)]});
    }

    for (int nd = 1; nd <= nd_max; ++nd) {
      const SourceConfig truth(
          std::vector<Dipole>(dipoles.begin(), dipoles.begin() + nd));
      const Eigen::VectorXd clean = predict_field(truth, lf);
      const double peak = clean.cwiseAbs().maxCoeff();
      for (std::size_t li = 0; li < spec.noise_multipliers.size(); ++li) {
        SuiteEntry entry;
        entry.group = g;
        entry.n_dipoles = nd;
        entry.noise_index = static_cast<int>(li);
        entry.noise_multiplier = spec.noise_multipliers[li];
        entry.noise_sd = entry.noise_multiplier * peak;
        entry.peak = peak;
        auto noise_rng = rng::make_stream(
            seed, {kNoiseTag, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(nd), li});
        entry.truth = truth;
        char gdir[16];
        std::snprintf(gdir, sizeof(gdir), "g%03d", g);
        entry.rel_path = std::string(gdir) + "/" + std::to_string(nd) + "_" +
                         noise_label(entry.noise_multiplier) + ".csv";
        entry.topo.values = add_noise(clean, entry.noise_sd, noise_rng);
        entry.topo.label = entry.rel_path.substr(0, entry.rel_path.size() - 4);
        suite.entries.push_back(std::move(entry));
      }
    }
  }
  return suite;
}

void save_suite(const Suite& suite, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create suite directory " + dir + ": " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["format"] = "dipole-asmc-suite";
  manifest["version"] = 1;
  manifest["seed"] = suite.seed;
  manifest["n_groups"] = suite.spec.n_groups;
  manifest["strengths"] = suite.spec.strengths;
  manifest["noise_multipliers"] = suite.spec.noise_multipliers;
  manifest["entries"] = nlohmann::ordered_json::array();

  for (const auto& entry : suite.entries) {
    const fs::path csv_path = fs::path(dir) / entry.rel_path;
    fs::create_directories(csv_path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory: " + csv_path.parent_path().string());
    save_topography_csv(entry.topo, csv_path.string());
    const std::string truth_rel =
        entry.rel_path.substr(0, entry.rel_path.size() - 4) + ".truth.json";
    save_source_config(entry.truth, (fs::path(dir) / truth_rel).string());
    manifest["entries"].push_back({{"file", entry.rel_path},
                                   {"truth", truth_rel},
                                   {"group", entry.group},
                                   {"n_dipoles", entry.n_dipoles},
                                   {"noise_index", entry.noise_index},
                                   {"noise_multiplier", entry.noise_multiplier},
                                   {"noise_sd", entry.noise_sd},
                                   {"peak", entry.peak}});
  }
  textio::write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace dipsmc
