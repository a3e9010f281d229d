#include "seisop/trajectory.hpp"

#include <cmath>
#include <string>

#include "seisop/error.hpp"

namespace seisop {

Trajectory::Trajectory(TimeGrid grid, std::size_t n_channels)
    : grid_(grid), n_ch_(n_channels), values_(n_channels * grid.size(), 0.0) {
  if (n_channels == 0) throw InvalidArgument("Trajectory: channel count must be >= 1");
}

Trajectory::Trajectory(TimeGrid grid, std::size_t n_channels, std::vector<double> values)
    : grid_(grid), n_ch_(n_channels), values_(std::move(values)) {
  if (n_channels == 0) throw InvalidArgument("Trajectory: channel count must be >= 1");
  if (values_.size() != n_ch_ * grid_.size()) {
    throw InvalidArgument("Trajectory: expected " + std::to_string(n_ch_ * grid_.size()) +
                          " values, got " + std::to_string(values_.size()));
  }
}

std::span<const double> Trajectory::channel(std::size_t c) const {
  if (c >= n_ch_) throw InvalidArgument("Trajectory: channel " + std::to_string(c) + " out of range");
  return std::span<const double>(values_).subspan(c * steps(), steps());
}

std::span<double> Trajectory::channel(std::size_t c) {
  if (c >= n_ch_) throw InvalidArgument("Trajectory: channel " + std::to_string(c) + " out of range");
  return std::span<double>(values_).subspan(c * steps(), steps());
}

void Trajectory::check_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NumericError("Trajectory: non-finite value at channel " + std::to_string(i / steps()) +
                         ", step " + std::to_string(i % steps()));
    }
  }
}

}  // namespace seisop
