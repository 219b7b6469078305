#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dipsmc/estimates.hpp"
#include "dipsmc/geometry.hpp"
#include "dipsmc/rng.hpp"
#include "dipsmc/state.hpp"

using namespace dipsmc;

namespace {

constexpr double kPi = 3.14159265358979323846;

SourceConfig make_config(std::vector<Dipole> dips) { return SourceConfig(std::move(dips)); }

Ensemble make_ensemble(std::vector<SourceConfig> particles, std::vector<double> weights) {
  Ensemble ens;
  ens.particles = std::move(particles);
  ens.log_weights.reserve(weights.size());
  for (double w : weights) ens.log_weights.push_back(std::log(w));
  ens.f = 1.0;
  return ens;
}

/// Thirty colinear cells, 2 mm apart; neighbor structure is irrelevant for
/// intensity peaks, only positions matter.
SourceGrid long_line_grid() {
  SourceGrid g;
  for (int i = 0; i < 30; ++i) g.points.push_back(Vec3(0.002 * i, 0.0, 0.0));
  g.spacing = 0.002;
  g.neighbor_radius = 0.003;
  g.proposal_sd = 0.002;
  g.neighbors.assign(30, {});
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("estimates");

TEST_CASE("dipole-count pmf accumulates particle weights by count") {
  const Ensemble ens = make_ensemble(
      {
          make_config({}),
          make_config({{1, 0.3, 1.0, 2e-9}}),
          make_config({{4, 0.5, 2.0, -3e-9}}),
          make_config({{1, 0.1, 0.5, 1e-9}, {3, 0.9, 4.0, 5e-9}}),
      },
      {0.1, 0.2, 0.3, 0.4});

  const std::vector<double> pmf = posterior_n_dipoles(ens, 2);
  REQUIRE(pmf.size() == 3);
  CHECK(pmf[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(pmf[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pmf[2] == doctest::Approx(0.4).epsilon(1e-14));

  CHECK_THROWS_AS((void)posterior_n_dipoles(ens, 1), std::invalid_argument);
}

TEST_CASE("pmf mode resolves ties to the smaller count") {
  CHECK(posterior_mode({0.2, 0.5, 0.3}) == 1);
  CHECK(posterior_mode({0.1, 0.2, 0.7}) == 2);
  CHECK(posterior_mode({0.4, 0.4, 0.2}) == 0);
  CHECK(posterior_mode({0.0, 0.5, 0.5}) == 1);
  CHECK(posterior_mode({1.0}) == 0);
  CHECK_THROWS_AS((void)posterior_mode({}), std::invalid_argument);
}

TEST_CASE("intensity map: hand-weighted occupancy, restricted to the count") {
  const Ensemble ens = make_ensemble(
      {
          make_config({{1, 0.3, 1.0, 2e-9}}),
          make_config({{1, 0.1, 0.5, 1e-9}, {3, 0.9, 4.0, 5e-9}}),
          make_config({}),
      },
      {0.25, 0.35, 0.4});

  const std::vector<double> one = intensity_map(ens, 1, 5);
  CHECK(one[1] == doctest::Approx(0.25).epsilon(1e-14));
  for (int c : {0, 2, 3, 4}) CHECK(one[static_cast<std::size_t>(c)] == 0.0);

  const std::vector<double> two = intensity_map(ens, 2, 5);
  CHECK(two[1] == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(two[3] == doctest::Approx(0.35).epsilon(1e-14));

  // n_hat = 0 is always answerable (the empty config occupies no cell)
  const std::vector<double> zero = intensity_map(ens, 0, 5);
  for (double v : zero) CHECK(v == 0.0);

  CHECK_THROWS_AS((void)intensity_map(ens, 3, 5), std::invalid_argument);
}

TEST_CASE("intensity map sums to n_hat times the count probability") {
  auto st = rng::make_stream(610, {0});
  PriorParams prior;
  prior.max_dipoles = 4;
  const int n_cells = 25;

  std::vector<SourceConfig> parts;
  std::vector<double> weights;
  double wsum = 0.0;
  for (int p = 0; p < 200; ++p) {
    parts.push_back(sample_prior(st, prior, n_cells));
    const double w = st.uniform(0.1, 1.0);
    weights.push_back(w);
    wsum += w;
  }
  for (auto& w : weights) w /= wsum;
  const Ensemble ens = make_ensemble(std::move(parts), std::move(weights));

  const std::vector<double> pmf = posterior_n_dipoles(ens, prior.max_dipoles);
  for (int n_hat = 0; n_hat <= prior.max_dipoles; ++n_hat) {
    if (n_hat > 0 && pmf[static_cast<std::size_t>(n_hat)] == 0.0) continue;
    const std::vector<double> intensity = intensity_map(ens, n_hat, n_cells);
    double total = 0.0;
    for (double v : intensity) total += v;
    CHECK(total ==
          doctest::Approx(n_hat * pmf[static_cast<std::size_t>(n_hat)]).epsilon(1e-12));
  }
}

TEST_CASE("peak extraction on a two-bump line intensity") {
  const SourceGrid grid = long_line_grid();
  std::vector<double> intensity(30, 0.0);
  for (int c = 0; c < 30; ++c) {
    const double d1 = static_cast<double>(c - 7);
    const double d2 = static_cast<double>(c - 22);
    intensity[static_cast<std::size_t>(c)] =
        std::exp(-d1 * d1 / 18.0) + 0.8 * std::exp(-d2 * d2 / 18.0) + 1e-4;
  }

  bool shortfall = true;
  const std::vector<int> two = extract_modes(intensity, grid, 2, 0.006, shortfall);
  CHECK(two == std::vector<int>{7, 22});  // ordered by decreasing intensity
  CHECK_FALSE(shortfall);

  const std::vector<int> one = extract_modes(intensity, grid, 1, 0.006, shortfall);
  CHECK(one == std::vector<int>{7});
  CHECK_FALSE(shortfall);

  // only two separated peaks exist, so asking for three must be flagged
  const std::vector<int> three = extract_modes(intensity, grid, 3, 0.006, shortfall);
  CHECK(three == std::vector<int>{7, 22});
  CHECK(shortfall);

  CHECK_THROWS_AS((void)extract_modes({1.0, 2.0}, grid, 1, 0.006, shortfall),
                  std::invalid_argument);
}

TEST_CASE("peak extraction thins equal peaks inside the radius, lower cell first") {
  SourceGrid g;
  g.points = {Vec3(0, 0, 0), Vec3(0.004, 0, 0), Vec3(0.01, 0, 0)};
  g.spacing = 0.004;
  g.neighbor_radius = 0.0065;
  g.proposal_sd = 0.005;
  g.neighbors.assign(3, {});

  bool shortfall = false;
  // cells 0 and 1 tie within the radius: both survive domination (strict >)
  // but greedy thinning keeps only the lower index
  const std::vector<int> peaks = extract_modes({0.5, 0.5, 0.0}, g, 2, 0.005, shortfall);
  CHECK(peaks == std::vector<int>{0});
  CHECK(shortfall);

  // a dominated shoulder never becomes a peak
  bool sf2 = true;
  const std::vector<int> top = extract_modes({0.5, 0.2, 0.3}, g, 2, 0.005, sf2);
  CHECK(top == std::vector<int>{0, 2});
  CHECK_FALSE(sf2);
}

TEST_CASE("conditional moment is the weighted mean at the cell") {
  const Dipole a{2, 0.2, 1.1, 4e-9};
  const Dipole b{2, 0.7, 2.3, -2e-9};
  const Dipole elsewhere{5, 0.5, 0.3, 1e-9};
  const Ensemble ens = make_ensemble(
      {
          make_config({a}),
          make_config({b, elsewhere}),  // two dipoles: skipped for n_hat = 1
          make_config({b}),
      },
      {0.5, 0.2, 0.3});

  const Vec3 expect = (0.5 * moment(a) + 0.3 * moment(b)) / 0.8;
  const Vec3 got = conditional_moment(ens, 1, 2);
  CHECK((got - expect).norm() <= 1e-15 * expect.norm());

  // at n_hat = 2 only the middle particle matches, and only via cell 2
  const Vec3 pair_moment = conditional_moment(ens, 2, 2);
  CHECK((pair_moment - moment(b)).norm() <= 1e-15 * moment(b).norm());

  CHECK_THROWS_AS((void)conditional_moment(ens, 1, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)conditional_moment(ens, 3, 2), std::invalid_argument);
}

TEST_CASE("point estimate: empty posterior yields an empty estimate") {
  const SourceGrid grid = build_spherical_grid(0.05, 0.032, 0.03, 0.065, 0.05);
  PriorParams prior;
  prior.max_dipoles = 2;
  const Ensemble ens = make_ensemble({make_config({}), make_config({})}, {0.5, 0.5});

  const EstimatedConfig est = point_estimate(ens, grid, prior);
  CHECK(est.n_hat == 0);
  CHECK(est.sources.empty());
  CHECK_FALSE(est.shortfall);
}

TEST_CASE("point estimate recovers a dominant single source") {
  const SourceGrid grid = build_spherical_grid(0.05, 0.032, 0.03, 0.065, 0.05);
  PriorParams prior;
  prior.max_dipoles = 2;
  int top = -1;
  for (int c = 0; c < grid.n_cells(); ++c)
    if ((grid.position(c) - Vec3(0.0, 0.0, 0.03)).norm() < 1e-12) top = c;
  REQUIRE(top >= 0);

  const Dipole main{top, 0.0, kPi / 2.0, 5e-8};
  const Dipole rival{0, 0.5, 1.0, 1e-9};
  const Ensemble ens = make_ensemble(
      {
          make_config({main}),
          make_config({main}),
          make_config({rival}),
          make_config({}),
      },
      {0.4, 0.3, 0.1, 0.2});

  const EstimatedConfig est = point_estimate(ens, grid, prior);
  CHECK(est.n_hat == 1);
  CHECK_FALSE(est.shortfall);
  REQUIRE(est.sources.size() == 1);
  CHECK(est.sources[0].cell == top);
  CHECK((est.sources[0].r - grid.position(top)).norm() == 0.0);
  CHECK(est.sources[0].intensity == doctest::Approx(0.7).epsilon(1e-14));
  CHECK((est.sources[0].moment - moment(main)).norm() <= 1e-15 * moment(main).norm());
}

TEST_CASE("point estimate resolves a two-dipole posterior into both cells") {
  const SourceGrid grid = build_spherical_grid(0.05, 0.032, 0.03, 0.065, 0.05);
  PriorParams prior;
  prior.max_dipoles = 2;

  const Dipole first{1, 0.2, 0.3, 3e-8};
  const Dipole second{6, 0.6, 2.0, -2e-8};
  const Ensemble ens = make_ensemble(
      {
          make_config({first, second}),
          make_config({first, second}),
          make_config({first}),
      },
      {0.45, 0.35, 0.2});

  const EstimatedConfig est = point_estimate(ens, grid, prior);
  CHECK(est.n_hat == 2);
  CHECK_FALSE(est.shortfall);
  REQUIRE(est.sources.size() == 2);
  CHECK(est.sources[0].cell == 1);  // equal intensities 0.8: lower cell first
  CHECK(est.sources[1].cell == 6);
  CHECK(est.sources[0].intensity == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(est.sources[1].intensity == doctest::Approx(0.8).epsilon(1e-14));
  CHECK((est.sources[0].moment - moment(first)).norm() <= 1e-14 * moment(first).norm());
  CHECK((est.sources[1].moment - moment(second)).norm() <= 1e-14 * moment(second).norm());
}

TEST_SUITE_END();
