#include "dipsmc/likelihood.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dipsmc/errors.hpp"
#include "dipsmc/textio.hpp"

namespace dipsmc {

NoiseModel::NoiseModel(double sigma) : sigma_(sigma) {
  if (!(sigma >= sigma_floor))
    throw ConfigError("noise sigma " + textio::fmt_g17(sigma) + " is below the floor " +
                      textio::fmt_g17(sigma_floor) + " T");
}

Eigen::VectorXd predict_field(const SourceConfig& config, const LeadField& lf) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(lf.n_sensors());
  for (const auto& d : config.dipoles()) {
    if (d.cell >= lf.n_cells()) throw DataError("dipole cell outside lead-field");
    b.noalias() += lf.g(d.cell).transpose() * moment(d);
  }
  return b;
}

double log_likelihood(const Topography& b, const SourceConfig& config, const LeadField& lf,
                      const NoiseModel& noise) {
  if (b.values.size() != lf.n_sensors())
    throw DataError("topography has " + std::to_string(b.values.size()) +
                    " values but lead-field expects " + std::to_string(lf.n_sensors()));
  const double s2 = noise.sigma() * noise.sigma();
  const double ssq = (b.values - predict_field(config, lf)).squaredNorm();
  return -0.5 * b.values.size() * std::log(2.0 * M_PI * s2) - 0.5 * ssq / s2;
}

double tempered_log_target(const Topography& b, const SourceConfig& config, const LeadField& lf,
                           const NoiseModel& noise, const PriorParams& prior,
                           const SourceGrid& grid, double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw NumericalError("tempering exponent outside [0, 1]");
  const double lp = log_prior(config, prior, grid.n_cells());
  if (lp == -std::numeric_limits<double>::infinity()) return lp;
  // f == 0 must reduce to the prior even though the likelihood is finite
  if (f == 0.0) return lp;
  return lp + f * log_likelihood(b, config, lf, noise);
}

void save_topography_csv(const Topography& b, const std::string& path) {
  std::ostringstream out;
  if (!b.label.empty()) out << "# label: " << b.label << '\n';
  for (Eigen::Index s = 0; s < b.values.size(); ++s) {
    if (s) out << ',';
    out << textio::fmt_g17(b.values[s]);
  }
  out << '\n';
  textio::write_file(path, out.str());
}

Topography load_topography_csv(const std::string& path) {
  const std::string content = textio::read_file(path);
  std::istringstream in(content);
  Topography topo;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      const auto pos = line.find("label:");
      if (pos != std::string::npos) {
        std::string label = line.substr(pos + 6);
        const auto start = label.find_first_not_of(" \t");
        topo.label = start == std::string::npos ? "" : label.substr(start);
        const auto end = topo.label.find_last_not_of(" \t\r");
        if (end != std::string::npos) topo.label.resize(end + 1);
      }
      continue;
    }
    const auto tokens = textio::split_csv(line);
    topo.values.resize(static_cast<Eigen::Index>(tokens.size()));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      topo.values[static_cast<Eigen::Index>(i)] = textio::parse_double(
          tokens[i], path + ":" + std::to_string(line_no) + ":field " + std::to_string(i + 1));
    }
    return topo;
  }
  throw DataError("topography file has no data row: " + path);
}

}  // namespace dipsmc
