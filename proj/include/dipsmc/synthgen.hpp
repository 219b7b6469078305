#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dipsmc/geometry.hpp"
#include "dipsmc/likelihood.hpp"
#include "dipsmc/rng.hpp"
#include "dipsmc/state.hpp"

namespace dipsmc {

struct SuiteSpec {
  std::vector<double> strengths{7e-9, 1e-8, 5e-9, 8e-9};  // A*m, one per dipole
  std::vector<double> noise_multipliers{0.0, 0.05, 0.10};  // times the peak |b|
  int n_groups = 10;
};

struct SuiteEntry {
  int group = 0;
  int n_dipoles = 0;
  int noise_index = 0;
  double noise_multiplier = 0.0;
  double noise_sd = 0.0;  // tesla, multiplier * peak of the clean field
  double peak = 0.0;      // max |b| of the clean field, tesla
  std::string rel_path;   // e.g. "g000/2_5.csv"
  SourceConfig truth;
  Topography topo;
};

struct Suite {
  std::uint64_t seed = 0;
  SuiteSpec spec;
  std::vector<SuiteEntry> entries;
};

/// Unit moment direction maximizing the broadside signal ||u^T g(cell)||:
/// the principal eigenvector of g g^T, canonicalized to the upper
/// half-sphere.  Throws DataError when the cell's lead-field vanishes
/// (radial-only cells at the head centre).
Vec3 max_signal_orientation(const LeadField& lf, int cell);

/// b plus iid Gaussian noise of standard deviation sd; sd = 0 returns b
/// unchanged and consumes no randomness.
Eigen::VectorXd add_noise(const Eigen::VectorXd& b, double sd, rng::Stream& rng);

/// Benchmark suite: per group, strengths.size() distinct visible cells with
/// maximum-signal orientations, nested ground truths using the first N
/// dipoles, and one topography per (N, noise multiplier) with fresh noise.
/// Per-(group, entry) random streams make generation order-independent.
Suite generate_suite(std::uint64_t seed, const SourceGrid& grid, const LeadField& lf,
                     const SuiteSpec& spec);

/// Writes topography CSVs, per-topography truth JSONs and manifest.json
/// under dir, using the layout <dir>/g<group>/<nd>_<noisepct>.csv.
void save_suite(const Suite& suite, const std::string& dir);

}  // namespace dipsmc
