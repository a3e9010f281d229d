#include "seisop/excitation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "seisop/error.hpp"

namespace seisop::excitation {

double WhiteNoiseSpec::sigma() const { return std::sqrt(2.0 * intensity * d_omega); }

double WhiteNoiseSpec::cutoff() const { return static_cast<double>(n_terms / 2) * d_omega; }

void WhiteNoiseSpec::validate() const {
  if (!(intensity > 0.0)) throw InvalidArgument("excitation.intensity: must be > 0");
  if (n_terms < 2 || n_terms % 2 != 0) {
    throw InvalidArgument("excitation.n_terms: must be even and >= 2, got " + std::to_string(n_terms));
  }
  if (!(d_omega > 0.0)) throw InvalidArgument("excitation.d_omega: must be > 0");
}

WhiteNoiseSpec WhiteNoiseSpec::reference() {
  return WhiteNoiseSpec{0.015, 1200, std::numbers::pi / 30.0, TimeGrid(0.01, 3001)};
}

Trajectory synthesize(const WhiteNoiseSpec& spec, std::span<const double> x) {
  spec.validate();
  if (x.size() != spec.n_terms) {
    throw InvalidArgument("synthesize: expected " + std::to_string(spec.n_terms) + " coefficients");
  }
  const std::size_t half = spec.n_terms / 2;
  const double sigma = spec.sigma();
  Trajectory out(spec.grid, 1);
  auto ag = out.channel(0);

  // cos/sin(j*theta) by the angle-addition recurrence over j, re-anchored with
  // direct evaluation every kAnchor terms to bound round-off growth.
  constexpr std::size_t kAnchor = 32;
  for (std::size_t k = 0; k < spec.grid.size(); ++k) {
    const double theta = spec.d_omega * spec.grid.time(k);
    const double c1 = std::cos(theta);
    const double s1 = std::sin(theta);
    double cj = 1.0;
    double sj = 0.0;
    double acc = 0.0;
    for (std::size_t j = 1; j <= half; ++j) {
      if (j % kAnchor == 0) {
        const double angle = static_cast<double>(j) * theta;
        cj = std::cos(angle);
        sj = std::sin(angle);
      } else {
        const double cn = cj * c1 - sj * s1;
        sj = sj * c1 + cj * s1;
        cj = cn;
      }
      acc += x[j - 1] * cj + x[half + j - 1] * sj;
    }
    ag[k] = sigma * acc;
  }
  return out;
}

Trajectory synthesize(const WhiteNoiseSpec& spec, RngStream& rng) {
  spec.validate();
  const auto x = standard_normal(rng, spec.n_terms);
  return synthesize(spec, x);
}

}  // namespace seisop::excitation
