#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <type_traits>

#include "seisop/error.hpp"
#include "seisop/linalg.hpp"
#include "seisop/trajectory.hpp"

namespace seisop::detail {

/// Marker for systems whose right-hand side is smooth.
struct NoSwitches {};

/// Classical RK4 over a sampled ground motion.
///
/// The state y is advanced over every grid interval [t_k, t_{k+1}] in
/// `substeps` equal steps; the excitation is linearly interpolated inside the
/// interval. `rhs(ag, y, dy)` evaluates the time derivative; `observe(k, y)` is
/// called at every grid point, k = 0 included.
///
/// `switches(y, s)`, when given, fills quantities whose sign changes mark
/// points where the right-hand side is not differentiable (velocity reversals
/// in hysteretic laws). It must be linear in y, so that switches(dy) is the
/// rate of change of the switches. A step that crosses one, either at its end
/// or as a pair of roots of the cubic Hermite model of the switch over the
/// step, is split at the first crossing, located by secant iteration on the
/// step map. RK4 then never straddles a kink and keeps fourth-order accuracy.
template <class Rhs, class Observe, class Switches = NoSwitches>
void integrate_rk4(const Trajectory& a_g, std::size_t substeps, Vector& y, Rhs&& rhs, Observe&& observe,
                   Switches&& switches = {}) {
  if (a_g.channels() != 1) throw InvalidArgument("integrate_rk4: ground motion must have one channel");
  if (substeps < 1) throw InvalidArgument("integrate_rk4: substeps must be >= 1");
  constexpr bool kHasSwitches = !std::is_same_v<std::decay_t<Switches>, NoSwitches>;

  const auto ag = a_g.channel(0);
  const double dt = a_g.grid().dt();
  const double inv_sub = 1.0 / static_cast<double>(substeps);
  const Eigen::Index n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), tmp(n);

  double a0 = 0.0;
  double a1 = 0.0;
  auto at = [&](double frac) { return a0 + (a1 - a0) * frac; };
  // One RK4 step from fraction f0 of the current interval over df.
  auto step = [&](const Vector& from, double f0, double df, Vector& to) {
    const double h = df * dt;
    rhs(at(f0), from, k1);
    tmp = from + (0.5 * h) * k1;
    rhs(at(f0 + 0.5 * df), tmp, k2);
    tmp = from + (0.5 * h) * k2;
    rhs(at(f0 + 0.5 * df), tmp, k3);
    tmp = from + h * k3;
    rhs(at(f0 + df), tmp, k4);
    to = from + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  [[maybe_unused]] Vector trial(n), s0, s1, sp, d0, d1, dy_end(n);
  // First crossing in (0, 1] of the cubic Hermite model of one switch, or 1.
  [[maybe_unused]] auto first_root = [](double p0, double p1, double m0, double m1) {
    if (p0 == 0.0) return 1.0;
    if ((p0 > 0.0) != (p1 > 0.0) && p1 != 0.0) return p0 / (p0 - p1);
    // p'(x) = a x^2 + b x + c; look for an interior extremum of opposite sign.
    const double a = 6.0 * p0 + 3.0 * m0 - 6.0 * p1 + 3.0 * m1;
    const double b = -6.0 * p0 - 4.0 * m0 + 6.0 * p1 - 2.0 * m1;
    const double c = m0;
    auto cubic = [&](double x) {
      const double x2 = x * x;
      const double x3 = x2 * x;
      return (2 * x3 - 3 * x2 + 1) * p0 + (x3 - 2 * x2 + x) * m0 + (-2 * x3 + 3 * x2) * p1 + (x3 - x2) * m1;
    };
    double best = 1.0;
    auto consider = [&](double x) {
      if (x > 0.0 && x < 1.0 && (cubic(x) > 0.0) != (p0 > 0.0)) {
        // Linear estimate of the root between 0 and the extremum.
        const double root = x * p0 / (p0 - cubic(x));
        best = std::min(best, root);
      }
    };
    if (std::abs(a) > 1e-300) {
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        consider((-b - sq) / (2.0 * a));
        consider((-b + sq) / (2.0 * a));
      }
    } else if (std::abs(b) > 1e-300) {
      consider(-c / b);
    }
    return best;
  };

  observe(std::size_t{0}, y);
  for (std::size_t k = 0; k + 1 < a_g.steps(); ++k) {
    a0 = ag[k];
    a1 = ag[k + 1];
    for (std::size_t s = 0; s < substeps; ++s) {
      const double f_begin = static_cast<double>(s) * inv_sub;
      const double f_end = static_cast<double>(s + 1) * inv_sub;
      if constexpr (!kHasSwitches) {
        step(y, f_begin, f_end - f_begin, trial);
        y.swap(trial);
      } else {
        constexpr int kMaxSplits = 16;
        constexpr double kMinFraction = 1e-9;
        double f = f_begin;
        for (int split = 0;; ++split) {
          const double df = f_end - f;
          const double h = df * dt;
          step(y, f, df, trial);
          switches(y, s0);
          switches(trial, s1);
          switches(k1, d0);
          rhs(at(f + df), trial, dy_end);
          switches(dy_end, d1);
          Eigen::Index which = -1;
          double theta = 1.0;
          for (Eigen::Index i = 0; i < s0.size(); ++i) {
            const double th = first_root(s0(i), s1(i), h * d0(i), h * d1(i));
            // A crossing this close is the one just stepped onto.
            if (th * df < kMinFraction * inv_sub) continue;
            if (th < theta) {
              theta = th;
              which = i;
            }
          }
          if (which < 0 || split == kMaxSplits) {
            y.swap(trial);
            break;
          }
          // Secant refinement of g(theta) = switch(step(y, theta)), seeded
          // with the current point.
          double th_a = 0.0, g_a = s0(which);
          for (int it = 0; it < 3; ++it) {
            step(y, f, theta * df, trial);
            switches(trial, sp);
            const double g = sp(which);
            if (g == g_a) break;
            const double next = theta - g * (theta - th_a) / (g - g_a);
            th_a = theta;
            g_a = g;
            if (!(next > 0.0 && next <= 1.0)) break;
            theta = next;
          }
          step(y, f, theta * df, trial);
          y.swap(trial);
          f += theta * df;
          if (f_end - f < kMinFraction * inv_sub) break;
        }
      }
    }
    if (!y.allFinite()) {
      std::ostringstream msg;
      msg << "integration blew up at t = " << a_g.grid().time(k + 1) << " s (step " << (k + 1)
          << ", substeps " << substeps << "); try more substeps";
      throw NumericError(msg.str());
    }
    observe(k + 1, y);
  }
}

}  // namespace seisop::detail
