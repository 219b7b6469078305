#include "dipsmc/metrics.hpp"

#include <limits>
#include <vector>

namespace dipsmc {

double delta_nd(const EstimatedConfig& est, const SourceConfig& truth) {
  return static_cast<double>(est.n_hat) - static_cast<double>(truth.n_dipoles());
}

namespace {

// min over injective assignments of every "small" point to a distinct
// "large" point of the summed pair distance
double best_assignment(const std::vector<Vec3>& small, const std::vector<Vec3>& large,
                       std::vector<bool>& used, std::size_t i) {
  if (i == small.size()) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < large.size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    const double rest = best_assignment(small, large, used, i + 1);
    used[j] = false;
    const double total = (small[i] - large[j]).norm() + rest;
    if (total < best) best = total;
  }
  return best;
}

}  // namespace

DeltaR delta_r(const EstimatedConfig& est, const SourceConfig& truth, const SourceGrid& grid) {
  std::vector<Vec3> est_pts;
  est_pts.reserve(est.sources.size());
  for (const auto& s : est.sources) est_pts.push_back(s.r);
  std::vector<Vec3> true_pts;
  true_pts.reserve(static_cast<std::size_t>(truth.n_dipoles()));
  for (const auto& d : truth.dipoles()) true_pts.push_back(grid.position(d.cell));

  DeltaR out;
  if (est_pts.empty() || true_pts.empty()) {
    out.undefined = true;  // no pairing exists; report zero but flag it
    return out;
  }
  const bool est_smaller = est_pts.size() <= true_pts.size();
  const auto& small = est_smaller ? est_pts : true_pts;
  const auto& large = est_smaller ? true_pts : est_pts;
  std::vector<bool> used(large.size(), false);
  out.value = best_assignment(small, large, used, 0) / static_cast<double>(small.size());
  return out;
}

}  // namespace dipsmc
