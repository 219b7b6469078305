#pragma once

#include <cstdint>
#include <vector>

#include "dipsmc/geometry.hpp"
#include "dipsmc/kernels.hpp"
#include "dipsmc/likelihood.hpp"
#include "dipsmc/rng.hpp"
#include "dipsmc/state.hpp"

namespace dipsmc {

/// Adaptive tempering controls.
struct AdaptConfig {
  int n_particles = 10000;
  double delta_min = 1e-5;
  double delta_max = 0.1;
  double ess_ratio_min = 0.9;   // tempering step accepted when the ESS ratio
  double ess_ratio_max = 0.99;  // falls inside [min, max]
  double resample_fraction = 0.5;
  int bisection_max_iters = 50;
  double bisection_tol = 1e-12;  // interval width below which bisection stops
};

/// Weighted particle population at one tempering exponent.
struct Ensemble {
  std::vector<SourceConfig> particles;
  std::vector<double> log_weights;  // normalized: logsumexp == 0
  double f = 0.0;
  int iteration = 1;

  std::vector<double> weights() const;
};

struct IterationRecord {
  int iteration = 1;
  double f = 0.0;
  double delta = 0.0;
  double ess = 0.0;        // after the weight update, before any resampling
  double ess_ratio = 0.0;  // NaN on the initial record
  double ess_post = 0.0;   // after any resampling (equals ess when none happened)
  bool resampled = false;
  bool at_boundary = false;  // delta pinned at a bound without meeting the ratio band
  bool terminal = false;     // final step jumping exactly to f = 1
  double sigma_i = 0.0;      // sigma / sqrt(f); +inf at f = 0
  std::vector<double> posterior_nd;  // P(N_D = 0..max) under current weights
};

struct SamplerOutput {
  Ensemble ensemble;
  std::vector<IterationRecord> history;
  double wall_time_s = 0.0;  // diagnostic only; never serialized (outputs stay reproducible)
  std::uint64_t seed = 0;
};

/// Effective sample size 1 / sum(w^2) of normalized weights.  Throws
/// NumericalError for empty, negative or all-zero weights.
double ess(const std::vector<double>& weights);

/// Same from unnormalized log weights.
double ess_from_log(const std::vector<double>& log_weights);

/// Systematic resampling: one uniform offset, stride 1/n_out over the
/// cumulative weights.  Returns n_out ascending ancestor indices (n_out = 0
/// means weights.size()); every ancestor's offspring count differs from
/// n_out * weight by less than one.
std::vector<int> systematic_resample(rng::Stream& rng, const std::vector<double>& weights,
                                     std::size_t n_out = 0);

struct DeltaResult {
  double delta = 0.0;
  std::vector<double> new_log_weights;  // normalized at the chosen delta
  double ess_old = 0.0;
  double ess_new = 0.0;
  double ratio = 0.0;
  bool at_boundary = false;
  bool terminal = false;
};

/// Chooses the next tempering increment.  Starts from min(delta_max, 1 - f);
/// a step reaching f = 1 is accepted unconditionally, otherwise the step is
/// accepted when ESS_new/ESS_old lies in the configured band and bisected
/// within [delta_min, delta_max] when it does not; if bisection collapses
/// the bound whose ratio is closest to the band is used.  A remainder
/// smaller than delta_min is never left behind.
DeltaResult propose_delta(const std::vector<double>& log_weights,
                          const std::vector<double>& log_lik, double f,
                          const AdaptConfig& adapt);

/// Full adaptive run: prior initialization at f = 0, then weight update /
/// optional resampling / kernel sweep per iteration until f = 1.
/// Deterministic for fixed seed regardless of worker count.
SamplerOutput run(std::uint64_t seed, const Topography& b, const LeadField& lf,
                  const SourceGrid& grid, const NoiseModel& noise, const PriorParams& prior,
                  const MoveParams& moves, const AdaptConfig& adapt);

}  // namespace dipsmc
