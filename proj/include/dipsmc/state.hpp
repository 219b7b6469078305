#pragma once

#include <vector>

#include "dipsmc/geometry.hpp"
#include "dipsmc/rng.hpp"

namespace dipsmc {

/// One current dipole.
///
/// Orientation is stored as (z, phi) with z = cos(polar angle) in [0, 1]
/// and phi in [0, 2*pi); antipodal directions are identified by folding the
/// moment sign into q, so q is signed and never zero.  When z == 0 the
/// canonical azimuth lies in [0, pi).
struct Dipole {
  int cell = 0;
  double z = 1.0;
  double phi = 0.0;
  double q = 0.0;  // A*m
};

/// Prior over configurations: truncated Poisson number of dipoles, uniform
/// distinct cells, uniform orientation on the half-sphere, log-uniform
/// strength magnitude over `strength_decades` decades starting at
/// `strength_scale`, equiprobable sign.
struct PriorParams {
  double lambda = 0.3;
  double strength_scale = 1e-10;  // A*m
  double strength_decades = 3.0;
  int max_dipoles = 10;
};

/// Unordered set of dipoles with pairwise-distinct cells, stored sorted by
/// ascending cell.  Construction canonicalizes orientations and rejects
/// duplicate cells, out-of-range coordinates and zero strengths.
class SourceConfig {
 public:
  SourceConfig() = default;
  explicit SourceConfig(std::vector<Dipole> dipoles);

  int n_dipoles() const { return static_cast<int>(dipoles_.size()); }
  const std::vector<Dipole>& dipoles() const { return dipoles_; }
  const Dipole& dipole(int d) const { return dipoles_[static_cast<std::size_t>(d)]; }
  bool occupies(int cell) const;

 private:
  std::vector<Dipole> dipoles_;
};

/// Unit direction for orientation coordinates:
/// (sin(acos z) cos phi, sin(acos z) sin phi, z).
/// Requires z in [0, 1] and phi in [0, 2*pi).
Vec3 direction_vector(double z, double phi);

/// Canonical (z, phi, sign_flip) for an arbitrary unit direction; the
/// returned flag says whether the direction was negated to reach the
/// upper half-sphere (the caller then negates q).
struct CanonicalOrientation {
  double z;
  double phi;
  bool flipped;
};
CanonicalOrientation canonical_orientation(const Vec3& u);

/// Dipole moment vector q * u(z, phi).
Vec3 moment(const Dipole& d);

/// log pmf of the dipole count: Poisson(lambda) truncated to
/// {0, ..., max_dipoles} and renormalized; -inf outside.
double truncated_poisson_log_pmf(int n, const PriorParams& prior);

/// Draws a configuration from the prior over a grid with n_cells cells.
SourceConfig sample_prior(rng::Stream& rng, const PriorParams& prior, int n_cells);

/// Log prior density of a configuration (set convention: the density of the
/// unordered set, i.e. N! times the per-slot factors).  Returns -inf when
/// the dipole count exceeds max_dipoles or a strength magnitude lies outside
/// the prior support.
double log_prior(const SourceConfig& config, const PriorParams& prior, int n_cells);

}  // namespace dipsmc
