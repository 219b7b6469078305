#pragma once

#include "dipsmc/estimates.hpp"
#include "dipsmc/geometry.hpp"
#include "dipsmc/state.hpp"

namespace dipsmc {

/// Signed dipole-count error: estimated minus true.
double delta_nd(const EstimatedConfig& est, const SourceConfig& truth);

struct DeltaR {
  double value = 0.0;    // metres
  bool undefined = false;  // either side empty: value fixed at 0 and flagged
};

/// Localization discrepancy: the smaller of the two source sets is matched
/// injectively to the larger one, minimizing (by exhaustive enumeration) the
/// average matched distance between estimated source positions and true
/// dipole cell positions.
DeltaR delta_r(const EstimatedConfig& est, const SourceConfig& truth, const SourceGrid& grid);

}  // namespace dipsmc
