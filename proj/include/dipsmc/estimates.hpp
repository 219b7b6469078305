#pragma once

#include <vector>

#include "dipsmc/geometry.hpp"
#include "dipsmc/sampler.hpp"
#include "dipsmc/state.hpp"

namespace dipsmc {

struct EstimatedSource {
  int cell = 0;
  Vec3 r = Vec3::Zero();
  Vec3 moment = Vec3::Zero();  // A*m
  double intensity = 0.0;
};

/// Point estimate: most probable dipole count plus one source per intensity
/// peak.  sources.size() < n_hat only when the intensity map had fewer
/// separated peaks than n_hat (flagged by shortfall).
struct EstimatedConfig {
  int n_hat = 0;
  std::vector<EstimatedSource> sources;
  bool shortfall = false;
};

/// Posterior pmf of the dipole count, entries 0..max_dipoles.
std::vector<double> posterior_n_dipoles(const Ensemble& ens, int max_dipoles);

/// Index of the pmf maximum; ties resolved to the smaller count.
int posterior_mode(const std::vector<double>& pmf);

/// Per-cell expected dipole count restricted to particles with exactly
/// n_hat dipoles: I(c) = sum_p W_p [N_p = n_hat] #{dipoles of p at c}.
/// Summing over cells gives n_hat * P(N_D = n_hat).  Throws when n_hat > 0
/// and no particle has that many dipoles.
std::vector<double> intensity_map(const Ensemble& ens, int n_hat, int n_cells);

/// Up to n_hat intensity peaks: cells whose intensity is >= every cell
/// within peak_radius, greedily thinned so returned peaks are more than
/// peak_radius apart; ordered by decreasing intensity, ties to the lower
/// cell index.  Sets shortfall when fewer peaks exist.
std::vector<int> extract_modes(const std::vector<double>& intensity, const SourceGrid& grid,
                               int n_hat, double peak_radius, bool& shortfall);

/// Posterior mean moment at `cell` over particles with exactly n_hat
/// dipoles, normalized by the intensity at that cell.
Vec3 conditional_moment(const Ensemble& ens, int n_hat, int cell);

/// Full pipeline: mode of the count pmf, intensity peaks, conditional
/// moments.  n_hat = 0 yields an empty estimate.
EstimatedConfig point_estimate(const Ensemble& ens, const SourceGrid& grid,
                               const PriorParams& prior, double peak_radius = 0.01);

}  // namespace dipsmc
