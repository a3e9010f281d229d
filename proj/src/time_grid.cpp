#include "seisop/time_grid.hpp"

#include <cmath>
#include <string>

#include "seisop/error.hpp"

namespace seisop {

TimeGrid::TimeGrid(double dt, std::size_t n_t) : dt_(dt), n_t_(n_t) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("TimeGrid: dt must be positive and finite, got " + std::to_string(dt));
  }
  if (n_t < 2) {
    throw InvalidArgument("TimeGrid: need at least 2 samples, got " + std::to_string(n_t));
  }
}

}  // namespace seisop
