#include "dipsmc/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dipsmc {

std::vector<double> posterior_n_dipoles(const Ensemble& ens, int max_dipoles) {
  std::vector<double> pmf(static_cast<std::size_t>(max_dipoles) + 1, 0.0);
  for (std::size_t p = 0; p < ens.particles.size(); ++p) {
    const int n = ens.particles[p].n_dipoles();
    if (n > max_dipoles) throw std::invalid_argument("particle exceeds max dipole count");
    pmf[static_cast<std::size_t>(n)] += std::exp(ens.log_weights[p]);
  }
  return pmf;
}

int posterior_mode(const std::vector<double>& pmf) {
  if (pmf.empty()) throw std::invalid_argument("empty pmf");
  std::size_t best = 0;
  for (std::size_t k = 1; k < pmf.size(); ++k)
    if (pmf[k] > pmf[best]) best = k;  // strict: ties keep the smaller count
  return static_cast<int>(best);
}

std::vector<double> intensity_map(const Ensemble& ens, int n_hat, int n_cells) {
  std::vector<double> intensity(static_cast<std::size_t>(n_cells), 0.0);
  bool any = n_hat == 0;
  for (std::size_t p = 0; p < ens.particles.size(); ++p) {
    if (ens.particles[p].n_dipoles() != n_hat) continue;
    any = true;
    const double w = std::exp(ens.log_weights[p]);
    for (const auto& d : ens.particles[p].dipoles())
      intensity[static_cast<std::size_t>(d.cell)] += w;
  }
  if (!any)
    throw std::invalid_argument("intensity_map: no particle has " + std::to_string(n_hat) +
                                " dipoles");
  return intensity;
}

std::vector<int> extract_modes(const std::vector<double>& intensity, const SourceGrid& grid,
                               int n_hat, double peak_radius, bool& shortfall) {
  if (static_cast<int>(intensity.size()) != grid.n_cells())
    throw std::invalid_argument("intensity map size does not match grid");
  const double r2 = peak_radius * peak_radius;

  // cells carrying mass, as candidate peaks unless dominated nearby
  std::vector<int> positive;
  for (int c = 0; c < grid.n_cells(); ++c)
    if (intensity[static_cast<std::size_t>(c)] > 0.0) positive.push_back(c);

  std::vector<int> candidates;
  for (int c : positive) {
    bool dominated = false;
    for (int other : positive) {
      if (other == c) continue;
      if ((grid.position(other) - grid.position(c)).squaredNorm() <= r2 &&
          intensity[static_cast<std::size_t>(other)] > intensity[static_cast<std::size_t>(c)]) {
        dominated = true;
        break;
      }
    }
    if (!dominated) candidates.push_back(c);
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    const double ia = intensity[static_cast<std::size_t>(a)];
    const double ib = intensity[static_cast<std::size_t>(b)];
    return ia != ib ? ia > ib : a < b;
  });

  std::vector<int> peaks;
  for (int c : candidates) {
    if (static_cast<int>(peaks.size()) == n_hat) break;
    bool suppressed = false;
    for (int kept : peaks)
      if ((grid.position(kept) - grid.position(c)).squaredNorm() <= r2) {
        suppressed = true;
        break;
      }
    if (!suppressed) peaks.push_back(c);
  }
  shortfall = static_cast<int>(peaks.size()) < n_hat;
  return peaks;
}

Vec3 conditional_moment(const Ensemble& ens, int n_hat, int cell) {
  Vec3 sum = Vec3::Zero();
  double mass = 0.0;
  for (std::size_t p = 0; p < ens.particles.size(); ++p) {
    if (ens.particles[p].n_dipoles() != n_hat) continue;
    const double w = std::exp(ens.log_weights[p]);
    for (const auto& d : ens.particles[p].dipoles()) {
      if (d.cell == cell) {
        sum += w * moment(d);
        mass += w;
      }
    }
  }
  if (mass <= 0.0)
    throw std::invalid_argument("conditional_moment: no posterior mass at cell " +
                                std::to_string(cell));
  return sum / mass;
}

EstimatedConfig point_estimate(const Ensemble& ens, const SourceGrid& grid,
                               const PriorParams& prior, double peak_radius) {
  EstimatedConfig est;
  const auto pmf = posterior_n_dipoles(ens, prior.max_dipoles);
  est.n_hat = posterior_mode(pmf);
  if (est.n_hat == 0) return est;

  const auto intensity = intensity_map(ens, est.n_hat, grid.n_cells());
  const auto peaks = extract_modes(intensity, grid, est.n_hat, peak_radius, est.shortfall);
  est.sources.reserve(peaks.size());
  for (int c : peaks) {
    EstimatedSource src;
    src.cell = c;
    src.r = grid.position(c);
    src.moment = conditional_moment(ens, est.n_hat, c);
    src.intensity = intensity[static_cast<std::size_t>(c)];
    est.sources.push_back(src);
  }
  return est;
}

}  // namespace dipsmc
