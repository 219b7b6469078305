#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace dipsmc {

using Vec3 = Eigen::Vector3d;

struct GridNeighbor {
  std::int32_t cell;
  double weight;  // unnormalized Gaussian location-proposal weight
};

/// Cubic-lattice source space restricted to a ball around the head centre.
///
/// Cells are lattice points (i,j,k)*spacing with |r| <= shell radius, stored
/// in lexicographic (x,y,z) order.  Each cell carries its neighbour list
/// (other cells within neighbor_radius) together with proposal weights
/// exp(-d^2 / (2 proposal_sd^2)); the cell itself is excluded.
struct SourceGrid {
  std::vector<Vec3> points;
  double spacing = 0.0;
  double neighbor_radius = 0.0;
  double proposal_sd = 0.0;
  std::vector<std::vector<GridNeighbor>> neighbors;

  int n_cells() const { return static_cast<int>(points.size()); }
  const Vec3& position(int c) const { return points[static_cast<std::size_t>(c)]; }
};

/// Radial magnetometers on a sphere above the head.
struct SensorArray {
  std::vector<Vec3> positions;
  std::vector<Vec3> orientations;  // unit vectors

  int n_sensors() const { return static_cast<int>(positions.size()); }
};

/// Per-cell response of the three axis-aligned unit dipoles.
///
/// g(c) is 3 x N_S: row k holds the sensor readings produced by a unit
/// dipole e_k (1 A*m) placed at cell c, so a dipole with moment m predicts
/// g(c)^T m.
class LeadField {
 public:
  LeadField() = default;
  LeadField(std::vector<Eigen::Matrix3Xd> g, int n_sensors)
      : g_(std::move(g)), n_sensors_(n_sensors) {}

  int n_cells() const { return static_cast<int>(g_.size()); }
  int n_sensors() const { return n_sensors_; }
  const Eigen::Matrix3Xd& g(int c) const { return g_[static_cast<std::size_t>(c)]; }

 private:
  std::vector<Eigen::Matrix3Xd> g_;
  int n_sensors_ = 0;
};

/// Magnetic field (tesla) at sensor position r of a current dipole with
/// moment q (A*m) at r0, both relative to the centre of a homogeneous
/// spherical conductor.  Closed-form solution; the field is independent of
/// the conductor radius and exactly zero for radial moments.
///
/// Throws DataError when r coincides with r0.
Vec3 sarvas_field(const Vec3& r0, const Vec3& q, const Vec3& r);

/// Builds the lattice source space.  Throws ConfigError on non-positive
/// spacing, spacing larger than the shell radius (empty grid), or a shell
/// not strictly inside the conductor.
SourceGrid build_spherical_grid(double conductor_radius, double shell_radius, double spacing,
                                double neighbor_radius = 0.01, double proposal_sd = 0.005);

/// n_sensors radial magnetometers on the upper hemisphere of radius
/// helmet_radius, laid out on a Fibonacci spiral; n_sensors = 1 gives the
/// north pole.  Throws ConfigError for n_sensors < 1 or radius <= 0.
SensorArray build_sensor_array(int n_sensors, double helmet_radius);

/// Dense lead-field for every (cell, sensor) pair; sensors measure the
/// field component along their orientation.
LeadField compute_leadfield(const SourceGrid& grid, const SensorArray& sensors);

/// Binary lead-field files: magic "LFMG", u32 version (=1), u32 N_C,
/// u32 N_S, then N_C row-major 3 x N_S float64 blocks; little-endian.
void save_leadfield(const LeadField& lf, const std::string& path);
LeadField load_leadfield(const std::string& path);

void save_grid_csv(const SourceGrid& grid, const std::string& path);
void save_sensors_csv(const SensorArray& sensors, const std::string& path);

}  // namespace dipsmc
