#include "dipsmc/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dipsmc/errors.hpp"

namespace dipsmc {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
const double kLn10 = std::log(10.0);

Dipole canonicalize(Dipole d) {
  if (!(std::isfinite(d.z) && std::isfinite(d.phi) && std::isfinite(d.q)))
    throw std::invalid_argument("dipole has non-finite coordinates");
  if (d.q == 0.0) throw std::invalid_argument("dipole strength must be non-zero");
  if (d.z < -1.0 || d.z > 1.0) throw std::invalid_argument("dipole z outside [-1, 1]");
  if (d.z < 0.0) {  // antipodal representative: negate direction and sign
    d.z = -d.z;
    d.phi += M_PI;
    d.q = -d.q;
  }
  if (d.phi < 0.0 || d.phi >= kTwoPi) {
    d.phi = std::fmod(d.phi, kTwoPi);
    if (d.phi < 0.0) d.phi += kTwoPi;
  }
  if (d.z == 0.0 && d.phi >= M_PI) {  // equator: identify phi with phi - pi
    d.phi -= M_PI;
    d.q = -d.q;
  }
  return d;
}

}  // namespace

SourceConfig::SourceConfig(std::vector<Dipole> dipoles) : dipoles_(std::move(dipoles)) {
  for (auto& d : dipoles_) {
    if (d.cell < 0) throw std::invalid_argument("negative cell index");
    d = canonicalize(d);
  }
  std::sort(dipoles_.begin(), dipoles_.end(),
            [](const Dipole& a, const Dipole& b) { return a.cell < b.cell; });
  for (std::size_t i = 1; i < dipoles_.size(); ++i) {
    if (dipoles_[i].cell == dipoles_[i - 1].cell)
      throw std::invalid_argument("duplicate cell in source configuration");
  }
}

bool SourceConfig::occupies(int cell) const {
  for (const auto& d : dipoles_)
    if (d.cell == cell) return true;
  return false;
}

Vec3 direction_vector(double z, double phi) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("direction z outside [0, 1]");
  if (!(phi >= 0.0 && phi < kTwoPi)) throw std::invalid_argument("direction phi outside [0, 2*pi)");
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));  // sin(acos z)
  return Vec3(s * std::cos(phi), s * std::sin(phi), z);
}

CanonicalOrientation canonical_orientation(const Vec3& u) {
  Vec3 v = u;
  bool flipped = false;
  if (v.z() < 0.0 || (v.z() == 0.0 && (v.y() < 0.0 || (v.y() == 0.0 && v.x() < 0.0)))) {
    v = -v;
    flipped = true;
  }
  double phi = std::atan2(v.y(), v.x());
  if (phi < 0.0) phi += kTwoPi;
  if (v.z() == 0.0 && phi >= M_PI) phi -= M_PI;  // guards atan2(-0.0, -1.0) == pi
  return {std::min(v.z(), 1.0), phi, flipped};
}

Vec3 moment(const Dipole& d) { return d.q * direction_vector(d.z, d.phi); }

double truncated_poisson_log_pmf(int n, const PriorParams& prior) {
  if (n < 0 || n > prior.max_dipoles) return -std::numeric_limits<double>::infinity();
  double z = 0.0;
  for (int j = 0; j <= prior.max_dipoles; ++j)
    z += std::exp(-prior.lambda + j * std::log(prior.lambda) - std::lgamma(j + 1.0));
  return -prior.lambda + n * std::log(prior.lambda) - std::lgamma(n + 1.0) - std::log(z);
}

SourceConfig sample_prior(rng::Stream& rng, const PriorParams& prior, int n_cells) {
  if (n_cells < prior.max_dipoles) throw ConfigError("grid smaller than max dipole count");

  // dipole count by inverse-cdf over the truncated pmf
  const double u = rng.uniform();
  int n = prior.max_dipoles;
  double cdf = 0.0;
  for (int j = 0; j <= prior.max_dipoles; ++j) {
    cdf += std::exp(truncated_poisson_log_pmf(j, prior));
    if (u < cdf) {
      n = j;
      break;
    }
  }

  std::vector<Dipole> dipoles;
  dipoles.reserve(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    int cell;
    bool taken;
    do {  // uniform over unoccupied cells via rejection
      cell = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_cells)));
      taken = false;
      for (const auto& existing : dipoles) taken = taken || existing.cell == cell;
    } while (taken);
    const double z = rng.uniform();
    const double phi = rng.uniform() * kTwoPi;
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const double q =
        sign * prior.strength_scale * std::pow(10.0, prior.strength_decades * rng.uniform());
    dipoles.push_back({cell, z, phi, q});
  }
  return SourceConfig(std::move(dipoles));
}

double log_prior(const SourceConfig& config, const PriorParams& prior, int n_cells) {
  const int n = config.n_dipoles();
  if (n > prior.max_dipoles || n > n_cells) return -std::numeric_limits<double>::infinity();

  // unordered-set density: pmf(N) * N! * prod_d (cells * orientation * strength)
  double lp = truncated_poisson_log_pmf(n, prior) + std::lgamma(n + 1.0);
  const double qmin = prior.strength_scale;
  const double qmax = prior.strength_scale * std::pow(10.0, prior.strength_decades);
  for (int d = 0; d < n; ++d) {
    const double aq = std::abs(config.dipole(d).q);
    if (aq < qmin || aq > qmax) return -std::numeric_limits<double>::infinity();
    lp -= std::log(static_cast<double>(n_cells - d));     // d-th draw from remaining cells
    lp -= std::log(kTwoPi);                               // phi uniform; z uniform has density 1
    lp -= std::log(2.0 * aq * kLn10 * prior.strength_decades);  // signed log-uniform strength
  }
  return lp;
}

}  // namespace dipsmc
