#pragma once

#include <span>

#include "seisop/rng.hpp"
#include "seisop/time_grid.hpp"
#include "seisop/trajectory.hpp"

namespace seisop::excitation {

/// Band-limited white noise as a finite Fourier series with Gaussian weights:
///
///   a_g(t) = sigma * sum_{j=1}^{n/2} [X_j cos(w_j t) + X_{n/2+j} sin(w_j t)],
///   w_j = j * d_omega,  sigma = sqrt(2 S d_omega).
///
/// The cutoff is (n/2) * d_omega by definition and is not stored separately.
struct WhiteNoiseSpec {
  double intensity;      ///< S, m^2/s^3
  std::size_t n_terms;   ///< n, even
  double d_omega;        ///< rad/s
  TimeGrid grid;

  double sigma() const;
  double cutoff() const;
  /// Pointwise variance of a_g: sigma^2 * n / 2, which is 2 S * cutoff for
  /// this normalization of sigma.
  double variance() const { return sigma() * sigma() * static_cast<double>(n_terms / 2); }
  void validate() const;

  /// S = 0.015, n = 1200, d_omega = pi/30, dt = 0.01, 30 s.
  static WhiteNoiseSpec reference();
};

/// Evaluates the series for explicit coefficients X (length n_terms).
Trajectory synthesize(const WhiteNoiseSpec& spec, std::span<const double> coefficients);

/// Draws n_terms standard normals from rng and evaluates the series.
Trajectory synthesize(const WhiteNoiseSpec& spec, RngStream& rng);

}  // namespace seisop::excitation
