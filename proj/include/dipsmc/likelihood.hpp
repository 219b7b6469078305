#pragma once

#include <Eigen/Core>
#include <string>

#include "dipsmc/geometry.hpp"
#include "dipsmc/state.hpp"

namespace dipsmc {

/// One measured field map (tesla), one value per sensor.
struct Topography {
  Eigen::VectorXd values;
  std::string label;
};

/// Isotropic Gaussian sensor noise.  Construction enforces the numerical
/// floor on sigma.
class NoiseModel {
 public:
  static constexpr double sigma_floor = 1e-14;  // tesla

  explicit NoiseModel(double sigma);
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

/// Field predicted by a configuration: sum of g(cell)^T moment over dipoles.
Eigen::VectorXd predict_field(const SourceConfig& config, const LeadField& lf);

/// Gaussian log likelihood of the topography under the configuration.
double log_likelihood(const Topography& b, const SourceConfig& config, const LeadField& lf,
                      const NoiseModel& noise);

/// log prior + f * log likelihood; requires f in [0, 1].
double tempered_log_target(const Topography& b, const SourceConfig& config, const LeadField& lf,
                           const NoiseModel& noise, const PriorParams& prior,
                           const SourceGrid& grid, double f);

/// Topography CSV: one comma-separated row of float64 values in tesla,
/// optionally preceded by a "# label: ..." comment line.
void save_topography_csv(const Topography& b, const std::string& path);
Topography load_topography_csv(const std::string& path);

}  // namespace dipsmc
