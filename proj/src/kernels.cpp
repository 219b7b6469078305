#include "dipsmc/kernels.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace dipsmc {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
const double kLn10 = std::log(10.0);

// Mutable sweep state: the dipole list (order frozen at sweep start) plus
// the cached log target of the configuration it denotes.
struct Sweep {
  std::vector<Dipole> dips;
  double lt;
};

SourceConfig as_config(const std::vector<Dipole>& dips) { return SourceConfig(dips); }

bool mh_accept(rng::Stream& rng, double log_a) {
  if (log_a >= 0.0) return true;
  return std::log(rng.uniform()) < log_a;
}

bool occupied_by_other(const std::vector<Dipole>& dips, int cell, int self) {
  for (std::size_t j = 0; j < dips.size(); ++j)
    if (static_cast<int>(j) != self && dips[j].cell == cell) return true;
  return false;
}

// log density of the prior's strength law, used as the birth proposal for q
double log_strength_density(double q, const PriorParams& prior) {
  return -std::log(2.0 * std::abs(q) * kLn10 * prior.strength_decades);
}

void birth_death_step(rng::Stream& rng, Sweep& sw, const LogTarget& target,
                      const SourceGrid& grid, const PriorParams& prior,
                      const MoveParams& params) {
  const int n = static_cast<int>(sw.dips.size());
  const int n_cells = grid.n_cells();
  const double v = rng.uniform();

  if (v < params.p_birth) {
    if (n >= n_cells) return;  // no unoccupied cell to propose
    int cell;
    do {
      cell = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_cells)));
    } while (occupied_by_other(sw.dips, cell, -1));
    const double z = rng.uniform();
    const double phi = rng.uniform() * kTwoPi;
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const double q =
        sign * prior.strength_scale * std::pow(10.0, prior.strength_decades * rng.uniform());

    std::vector<Dipole> proposed = sw.dips;
    proposed.push_back({cell, z, phi, q});
    const double lt_new = target(as_config(proposed));
    const double log_a =
        kernels_detail::log_birth_ratio(lt_new - sw.lt, n, n_cells, q, prior, params);
    if (mh_accept(rng, log_a)) {
      // keep ascending-cell order so the sweep snapshot stays canonical
      std::size_t pos = 0;
      while (pos < sw.dips.size() && sw.dips[pos].cell < cell) ++pos;
      sw.dips.insert(sw.dips.begin() + static_cast<std::ptrdiff_t>(pos),
                     Dipole{cell, z, phi, q});
      sw.lt = lt_new;
    }
  } else if (v < params.p_birth + params.p_death) {
    if (n == 0) return;
    const int idx = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    const double q_removed = sw.dips[static_cast<std::size_t>(idx)].q;
    std::vector<Dipole> proposed = sw.dips;
    proposed.erase(proposed.begin() + idx);
    const double lt_new = target(as_config(proposed));
    const double log_a =
        kernels_detail::log_death_ratio(lt_new - sw.lt, n, n_cells, q_removed, prior, params);
    if (mh_accept(rng, log_a)) {
      sw.dips.erase(sw.dips.begin() + idx);
      sw.lt = lt_new;
    }
  }
}

void location_step(rng::Stream& rng, Sweep& sw, int i, const LogTarget& target,
                   const SourceGrid& grid) {
  Dipole& d = sw.dips[static_cast<std::size_t>(i)];
  const auto& nb = grid.neighbors[static_cast<std::size_t>(d.cell)];

  double total_fwd = 0.0;
  for (const auto& cand : nb)
    if (!occupied_by_other(sw.dips, cand.cell, i)) total_fwd += cand.weight;
  if (total_fwd <= 0.0) return;  // isolated or fully surrounded: no-op

  const double t = rng.uniform() * total_fwd;
  double acc = 0.0;
  int new_cell = -1;
  for (const auto& cand : nb) {
    if (occupied_by_other(sw.dips, cand.cell, i)) continue;
    acc += cand.weight;
    new_cell = cand.cell;
    if (t < acc) break;
  }

  double total_rev = 0.0;
  for (const auto& cand : grid.neighbors[static_cast<std::size_t>(new_cell)])
    if (!occupied_by_other(sw.dips, cand.cell, i)) total_rev += cand.weight;
  // symmetric pair weights cancel; only the normalizations differ
  const double log_corr = std::log(total_fwd) - std::log(total_rev);

  std::vector<Dipole> proposed = sw.dips;
  proposed[static_cast<std::size_t>(i)].cell = new_cell;
  const double lt_new = target(as_config(proposed));
  if (mh_accept(rng, (lt_new - sw.lt) + log_corr)) {
    d.cell = new_cell;
    sw.lt = lt_new;
  }
}

void orientation_step(rng::Stream& rng, Sweep& sw, int i, const LogTarget& target,
                      const MoveParams& params) {
  Dipole& d = sw.dips[static_cast<std::size_t>(i)];
  const Vec3 u = direction_vector(d.z, d.phi);
  Vec3 v;
  do {
    v = u + params.dir_sd * Vec3(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-12);
  v.normalize();
  const CanonicalOrientation co = canonical_orientation(v);

  std::vector<Dipole> proposed = sw.dips;
  auto& pd = proposed[static_cast<std::size_t>(i)];
  pd.z = co.z;
  pd.phi = co.phi;
  pd.q = co.flipped ? -d.q : d.q;
  const double lt_new = target(as_config(proposed));
  if (mh_accept(rng, lt_new - sw.lt)) {  // proposal symmetric on the sphere
    d = pd;
    sw.lt = lt_new;
  }
}

void strength_step(rng::Stream& rng, Sweep& sw, int i, const LogTarget& target,
                   const MoveParams& params) {
  Dipole& d = sw.dips[static_cast<std::size_t>(i)];
  const double sd = std::abs(d.q) * params.strength_sd_factor;
  const double q_new = d.q + sd * rng.normal();
  if (q_new == 0.0) return;  // reverse proposal undefined at exactly zero

  std::vector<Dipole> proposed = sw.dips;
  proposed[static_cast<std::size_t>(i)].q = q_new;
  const double lt_new = target(as_config(proposed));

  // state-dependent sd needs the full Hastings correction
  const double sd_rev = std::abs(q_new) * params.strength_sd_factor;
  const double diff2 = (q_new - d.q) * (q_new - d.q);
  const double log_corr = -std::log(sd_rev) - diff2 / (2.0 * sd_rev * sd_rev) +
                          std::log(sd) + diff2 / (2.0 * sd * sd);

  if (mh_accept(rng, (lt_new - sw.lt) + log_corr)) {
    d.q = q_new;
    sw.lt = lt_new;
  }
}

Sweep make_sweep(const SourceConfig& config, const LogTarget& target) {
  return Sweep{config.dipoles(), target(config)};
}

void check_index(const SourceConfig& config, int d) {
  if (d < 0 || d >= config.n_dipoles())
    throw std::invalid_argument("dipole index out of range");
}

}  // namespace

SourceConfig birth_death_move(rng::Stream& rng, const SourceConfig& config,
                              const LogTarget& target, const SourceGrid& grid,
                              const PriorParams& prior, const MoveParams& params) {
  Sweep sw = make_sweep(config, target);
  birth_death_step(rng, sw, target, grid, prior, params);
  return as_config(sw.dips);
}

SourceConfig location_move(rng::Stream& rng, const SourceConfig& config, int d,
                           const LogTarget& target, const SourceGrid& grid,
                           const MoveParams& /*params*/) {
  check_index(config, d);
  Sweep sw = make_sweep(config, target);
  location_step(rng, sw, d, target, grid);
  return as_config(sw.dips);
}

SourceConfig orientation_move(rng::Stream& rng, const SourceConfig& config, int d,
                              const LogTarget& target, const MoveParams& params) {
  check_index(config, d);
  Sweep sw = make_sweep(config, target);
  orientation_step(rng, sw, d, target, params);
  return as_config(sw.dips);
}

SourceConfig strength_move(rng::Stream& rng, const SourceConfig& config, int d,
                           const LogTarget& target, const MoveParams& params) {
  check_index(config, d);
  Sweep sw = make_sweep(config, target);
  strength_step(rng, sw, d, target, params);
  return as_config(sw.dips);
}

SourceConfig full_sweep(rng::Stream& rng, const SourceConfig& config, const LogTarget& target,
                        const SourceGrid& grid, const PriorParams& prior,
                        const MoveParams& params) {
  Sweep sw = make_sweep(config, target);
  birth_death_step(rng, sw, target, grid, prior, params);
  // Visit dipoles in uniformly random order; each index keeps denoting the
  // same dipole even if location moves reorder the cells. The order must not
  // be a fixed function of the state: indices are assigned by sorted cell, so
  // a fixed scan couples the visit order to the state, and a location step
  // that carries a dipole past another breaks that coupling's reversibility
  // and skews multi-dipole occupancy. A state-independent shuffle keeps the
  // composed sweep exactly target-invariant.
  const int n = static_cast<int>(sw.dips.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int k = n - 1; k > 0; --k) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k) + 1));
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(j)]);
  }
  for (const int i : order) {
    location_step(rng, sw, i, target, grid);
    orientation_step(rng, sw, i, target, params);
    strength_step(rng, sw, i, target, params);
  }
  return as_config(sw.dips);
}

namespace kernels_detail {

double log_birth_ratio(double delta_log_target, int n_before, int n_cells, double q_new,
                       const PriorParams& prior, const MoveParams& params) {
  // forward: pick birth, cell uniform over unoccupied, orientation uniform,
  // strength from the prior law; reverse: pick death, dipole uniform
  const double log_fwd = std::log(params.p_birth) - std::log(static_cast<double>(n_cells - n_before)) -
                         std::log(kTwoPi) + log_strength_density(q_new, prior);
  const double log_rev =
      std::log(params.p_death) - std::log(static_cast<double>(n_before + 1));
  return delta_log_target + log_rev - log_fwd;
}

double log_death_ratio(double delta_log_target, int n_before, int n_cells, double q_removed,
                       const PriorParams& prior, const MoveParams& params) {
  const double log_fwd =
      std::log(params.p_death) - std::log(static_cast<double>(n_before));
  const double log_rev = std::log(params.p_birth) -
                         std::log(static_cast<double>(n_cells - n_before + 1)) -
                         std::log(kTwoPi) + log_strength_density(q_removed, prior);
  return delta_log_target + log_rev - log_fwd;
}

}  // namespace kernels_detail

}  // namespace dipsmc
