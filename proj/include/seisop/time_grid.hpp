#pragma once

#include <cstddef>

namespace seisop {

/// Uniform sampling t_k = k * dt for k = 0 .. size()-1.
class TimeGrid {
 public:
  TimeGrid(double dt, std::size_t n_t);

  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return n_t_; }
  /// (n_t - 1) * dt
  double duration() const noexcept { return static_cast<double>(n_t_ - 1) * dt_; }
  double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double dt_;
  std::size_t n_t_;
};

}  // namespace seisop
