#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "dipsmc/estimates.hpp"
#include "dipsmc/geometry.hpp"
#include "dipsmc/metrics.hpp"
#include "dipsmc/rng.hpp"
#include "dipsmc/state.hpp"
#include "support/oracles.hpp"

using namespace dipsmc;

namespace {

const SourceGrid& ball_grid() {
  static SourceGrid g = build_spherical_grid(0.05, 0.045, 0.03, 0.065, 0.05);  // 19 cells
  return g;
}

EstimatedConfig est_at(std::vector<Vec3> positions, int n_hat = -1) {
  EstimatedConfig est;
  est.n_hat = n_hat < 0 ? static_cast<int>(positions.size()) : n_hat;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    EstimatedSource s;
    s.cell = static_cast<int>(i);
    s.r = positions[i];
    s.intensity = 1.0;
    est.sources.push_back(s);
  }
  return est;
}

SourceConfig truth_at(const std::vector<int>& cells) {
  std::vector<Dipole> dips;
  for (int c : cells) dips.push_back({c, 0.5, 1.0, 1e-8});
  return SourceConfig(dips);
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("dipole-count error is a plain signed difference") {
  CHECK(delta_nd(est_at({}, 2), truth_at({0, 5})) == 0.0);
  CHECK(delta_nd(est_at({}, 1), truth_at({0, 3, 5})) == -2.0);
  CHECK(delta_nd(est_at({}, 4), truth_at({0, 3, 5})) == 1.0);
  CHECK(delta_nd(est_at({}, 0), truth_at({})) == 0.0);
}

TEST_CASE("identical configurations have zero localization error") {
  const SourceGrid& g = ball_grid();
  const SourceConfig truth = truth_at({2, 11});
  const EstimatedConfig est = est_at({g.position(2), g.position(11)});
  const DeltaR dr = delta_r(est, truth, g);
  CHECK(dr.value == 0.0);
  CHECK_FALSE(dr.undefined);
}

TEST_CASE("one estimate against two true sources matches the nearer one") {
  // 3 mm offset along x from a true source; the farther source plays no role
  const SourceGrid g = build_spherical_grid(0.05, 0.032, 0.03, 0.065, 0.05);
  int top = -1, left = -1;
  for (int c = 0; c < g.n_cells(); ++c) {
    if ((g.position(c) - Vec3(0.0, 0.0, 0.03)).norm() < 1e-12) top = c;
    if ((g.position(c) - Vec3(-0.03, 0.0, 0.0)).norm() < 1e-12) left = c;
  }
  REQUIRE(top >= 0);
  REQUIRE(left >= 0);

  const SourceConfig truth = truth_at({left, top});
  const EstimatedConfig est = est_at({Vec3(0.003, 0.0, 0.03)});
  const DeltaR dr = delta_r(est, truth, g);
  CHECK(dr.value == 0.003);
  CHECK_FALSE(dr.undefined);
}

TEST_CASE("the pairing is the assignment minimum, not the listing order") {
  const SourceGrid g = build_spherical_grid(0.05, 0.032, 0.03, 0.065, 0.05);
  int rgt = -1, lft = -1;
  for (int c = 0; c < g.n_cells(); ++c) {
    if ((g.position(c) - Vec3(0.03, 0.0, 0.0)).norm() < 1e-12) rgt = c;
    if ((g.position(c) - Vec3(-0.03, 0.0, 0.0)).norm() < 1e-12) lft = c;
  }
  REQUIRE(rgt >= 0);
  REQUIRE(lft >= 0);

  // sources listed right-then-left while truth sorts left-then-right: the
  // swapped pairing (1 mm each) must beat the straight one (59 mm each)
  const Vec3 near_right(0.029, 0.0, 0.0);
  const Vec3 near_left(-0.029, 0.0, 0.0);
  const EstimatedConfig est = est_at({near_right, near_left});
  const SourceConfig truth = truth_at({lft, rgt});

  const double d_swap =
      (near_right - g.position(rgt)).norm() + ((near_left - g.position(lft)).norm() + 0.0);
  const double d_straight = (near_right - g.position(lft)).norm();
  const DeltaR dr = delta_r(est, truth, g);
  CHECK(dr.value == d_swap / 2.0);
  CHECK(dr.value < d_straight / 2.0);
}

TEST_CASE("an empty side is flagged instead of scored") {
  const SourceGrid& g = ball_grid();
  const DeltaR empty_est = delta_r(est_at({}, 0), truth_at({3}), g);
  CHECK(empty_est.value == 0.0);
  CHECK(empty_est.undefined);

  const DeltaR empty_truth = delta_r(est_at({g.position(3)}), truth_at({}), g);
  CHECK(empty_truth.value == 0.0);
  CHECK(empty_truth.undefined);

  const DeltaR both = delta_r(est_at({}, 0), truth_at({}), g);
  CHECK(both.value == 0.0);
  CHECK(both.undefined);
}

TEST_CASE("swapping the roles of two equal-size sets changes nothing") {
  const SourceGrid& g = ball_grid();
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    auto st = rng::make_stream(700, {trial});
    const int a0 = static_cast<int>(st.uniform_int(19));
    int a1;
    do {
      a1 = static_cast<int>(st.uniform_int(19));
    } while (a1 == a0);
    const int b0 = static_cast<int>(st.uniform_int(19));
    int b1;
    do {
      b1 = static_cast<int>(st.uniform_int(19));
    } while (b1 == b0);

    const DeltaR fwd = delta_r(est_at({g.position(a0), g.position(a1)}), truth_at({b0, b1}), g);
    const DeltaR rev = delta_r(est_at({g.position(b0), g.position(b1)}), truth_at({a0, a1}), g);
    CHECK(fwd.value == rev.value);
  }
}

TEST_CASE("exhaustive assignment beats the greedy nearest-neighbour bound") {
  const SourceGrid& g = ball_grid();
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    auto st = rng::make_stream(701, {trial});
    const int n_est = 1 + static_cast<int>(st.uniform_int(4));
    const int n_true = 1 + static_cast<int>(st.uniform_int(4));

    std::vector<Vec3> pts;
    for (int i = 0; i < n_est; ++i)
      pts.push_back(Vec3(st.uniform(-0.03, 0.03), st.uniform(-0.03, 0.03),
                         st.uniform(-0.03, 0.03)));
    std::vector<int> cells;
    while (static_cast<int>(cells.size()) < n_true) {
      const int c = static_cast<int>(st.uniform_int(19));
      bool dup = false;
      for (int k : cells) dup |= k == c;
      if (!dup) cells.push_back(c);
    }
    const EstimatedConfig est = est_at(pts);
    const SourceConfig truth = truth_at(cells);
    const DeltaR dr = delta_r(est, truth, g);

    // average, over the smaller set, of each point's distance to its nearest
    // counterpart: an upper bound reachable only without assignment conflicts
    std::vector<Vec3> small = pts, large;
    for (int c : cells) large.push_back(g.position(c));
    if (small.size() > large.size()) std::swap(small, large);
    double greedy = 0.0;
    for (const Vec3& s : small) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const Vec3& l : large) nearest = std::min(nearest, (s - l).norm());
      greedy += nearest;
    }
    greedy /= static_cast<double>(small.size());
    CHECK(dr.value >= greedy - 1e-15);
  }
}

TEST_CASE("200 random instances agree with the permutation oracle") {
  const SourceGrid& g = ball_grid();
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    auto st = rng::make_stream(702, {trial});
    const int n_est = 1 + static_cast<int>(st.uniform_int(4));
    const int n_true = 1 + static_cast<int>(st.uniform_int(4));

    std::vector<Vec3> pts;
    for (int i = 0; i < n_est; ++i)
      pts.push_back(Vec3(st.uniform(-0.04, 0.04), st.uniform(-0.04, 0.04),
                         st.uniform(-0.04, 0.04)));
    std::vector<int> cells;
    while (static_cast<int>(cells.size()) < n_true) {
      const int c = static_cast<int>(st.uniform_int(19));
      bool dup = false;
      for (int k : cells) dup |= k == c;
      if (!dup) cells.push_back(c);
    }

    std::vector<Vec3> true_pts;
    for (int c : cells) true_pts.push_back(g.position(c));

    const DeltaR dr = delta_r(est_at(pts), truth_at(cells), g);
    const double ref = oracle::min_average_match(pts, true_pts);
    CHECK(dr.value == doctest::Approx(ref).epsilon(1e-14));
  }
}

TEST_SUITE_END();
