#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seisop/time_grid.hpp"

namespace seisop {

/// Multi-channel time history sampled on a TimeGrid.
///
/// Values are stored row-major as [channel][time]. For structural responses
/// channel 0 is story 1 and channels ascend with height.
class Trajectory {
 public:
  Trajectory(TimeGrid grid, std::size_t n_channels);
  Trajectory(TimeGrid grid, std::size_t n_channels, std::vector<double> values);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t channels() const noexcept { return n_ch_; }
  std::size_t steps() const noexcept { return grid_.size(); }

  std::span<const double> channel(std::size_t c) const;
  std::span<double> channel(std::size_t c);

  double operator()(std::size_t c, std::size_t k) const { return values_[c * steps() + k]; }
  double& operator()(std::size_t c, std::size_t k) { return values_[c * steps() + k]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Throws NumericError if any entry is NaN or infinite.
  void check_finite() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  TimeGrid grid_;
  std::size_t n_ch_;
  std::vector<double> values_;
};

}  // namespace seisop
