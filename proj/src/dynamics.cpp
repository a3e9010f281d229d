#include "seisop/dynamics.hpp"

#include <cmath>
#include <string>

#include "seisop/error.hpp"
#include "seisop/integrator.hpp"

namespace seisop::dynamics {

BoucWenParams BoucWenParams::with_yield(double u_y, double alpha, double n_exp, double A) {
  BoucWenParams p;
  p.alpha = alpha;
  p.n_exp = n_exp;
  p.A = A;
  p.u_y = u_y;
  p.delta = 1.0 / (2.0 * std::pow(u_y, n_exp));
  p.zeta = p.delta;
  return p;
}

double BoucWenParams::ultimate_hysteretic() const { return std::pow(A / (delta + zeta), 1.0 / n_exp); }

void BoucWenParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("model.hysteresis.alpha: must lie in [0, 1]");
  if (!(n_exp >= 1.0)) throw InvalidArgument("model.hysteresis.n: must be >= 1");
  if (!(u_y > 0.0)) throw InvalidArgument("model.hysteresis.u_y: must be > 0");
  if (!std::isfinite(A) || !std::isfinite(delta) || !std::isfinite(zeta)) {
    throw InvalidArgument("model.hysteresis: A, delta, zeta must be finite");
  }
}

DenseMatrix ShearBuildingModel::mass_matrix() const {
  const auto n = static_cast<Eigen::Index>(n_dof());
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = masses[static_cast<std::size_t>(i)];
  return m;
}

DenseMatrix ShearBuildingModel::compatibility() const {
  const auto n = static_cast<Eigen::Index>(n_dof());
  DenseMatrix a = DenseMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    if (i > 0) a(i, i - 1) = -1.0;
  }
  return a;
}

DenseMatrix ShearBuildingModel::elastic_stiffness() const {
  const DenseMatrix af = compatibility();
  Vector k(static_cast<Eigen::Index>(n_dof()));
  for (std::size_t i = 0; i < n_dof(); ++i) k(static_cast<Eigen::Index>(i)) = stiffnesses[i];
  return af.transpose() * k.asDiagonal() * af;
}

void ShearBuildingModel::validate() const {
  if (masses.empty()) throw InvalidArgument("model.masses: at least one story required");
  if (stiffnesses.size() != masses.size()) {
    throw InvalidArgument("model.stiffnesses: expected " + std::to_string(masses.size()) + " entries");
  }
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] > 0.0)) throw InvalidArgument("model.masses[" + std::to_string(i) + "]: must be > 0");
    if (!(stiffnesses[i] > 0.0)) {
      throw InvalidArgument("model.stiffnesses[" + std::to_string(i) + "]: must be > 0");
    }
  }
  if (!(damping_ratio >= 0.0 && damping_ratio < 1.0)) {
    throw InvalidArgument("model.damping_ratio: must lie in [0, 1)");
  }
  hysteresis.validate();
}

ShearBuildingModel ShearBuildingModel::reference() {
  ShearBuildingModel m;
  m.masses.assign(5, 3.0e4);
  m.stiffnesses.assign(5, 5.0e7);
  m.damping_ratio = 0.05;
  m.hysteresis = BoucWenParams::with_yield(0.01);
  return m;
}

DenseMatrix build_modal_damping(const ShearBuildingModel& model) {
  model.validate();
  const DenseMatrix m = model.mass_matrix();
  const auto n = m.rows();
  if (model.damping_ratio == 0.0) return DenseMatrix::Zero(n, n);
  const GeneralizedEigen eig = solve_sym_generalized_eig(model.elastic_stiffness(), m);
  Vector modal(n);
  for (Eigen::Index j = 0; j < n; ++j) modal(j) = 2.0 * model.damping_ratio * std::sqrt(eig.values(j));
  const DenseMatrix mphi = m * eig.vectors;
  DenseMatrix c = mphi * modal.asDiagonal() * mphi.transpose();
  return 0.5 * (c + c.transpose());
}

std::vector<double> restoring_force(const ShearBuildingModel& model, std::span<const double> v,
                                    std::span<const double> h) {
  const std::size_t n = model.n_dof();
  if (v.size() != n || h.size() != n) throw InvalidArgument("restoring_force: length mismatch");
  const double a = model.hysteresis.alpha;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = model.stiffnesses[i] * (a * v[i] + (1.0 - a) * h[i]);
  return r;
}

std::vector<double> nodal_forces(std::span<const double> r) {
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) f[i] = r[i] - (i + 1 < r.size() ? r[i + 1] : 0.0);
  return f;
}

double max_frequency(const ShearBuildingModel& model) {
  const GeneralizedEigen eig = solve_sym_generalized_eig(model.elastic_stiffness(), model.mass_matrix());
  return std::sqrt(eig.values(eig.values.size() - 1));
}

NonlinearResponse simulate_nonlinear_states(const ShearBuildingModel& model, const Trajectory& a_g,
                                            std::size_t substeps) {
  model.validate();
  const std::size_t n = model.n_dof();
  const auto ni = static_cast<Eigen::Index>(n);
  const DenseMatrix c = build_modal_damping(model);
  const BoucWenParams& bw = model.hysteresis;

  Vector inv_mass(ni), k(ni);
  for (std::size_t i = 0; i < n; ++i) {
    inv_mass(static_cast<Eigen::Index>(i)) = 1.0 / model.masses[i];
    k(static_cast<Eigen::Index>(i)) = model.stiffnesses[i];
  }
  Vector v(ni), vdot(ni), r(ni), f(ni);

  // y = [u, u', h]
  auto rhs = [&](double ag, const Vector& y, Vector& dy) {
    const auto u = y.segment(0, ni);
    const auto ud = y.segment(ni, ni);
    const auto h = y.segment(2 * ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
      v(i) = u(i) - (i > 0 ? u(i - 1) : 0.0);
      vdot(i) = ud(i) - (i > 0 ? ud(i - 1) : 0.0);
      r(i) = k(i) * (bw.alpha * v(i) + (1.0 - bw.alpha) * h(i));
    }
    for (Eigen::Index i = 0; i < ni; ++i) f(i) = r(i) - (i + 1 < ni ? r(i + 1) : 0.0);
    f.noalias() += c * ud;
    dy.segment(0, ni) = ud;
    for (Eigen::Index i = 0; i < ni; ++i) {
      dy(ni + i) = -ag - inv_mass(i) * f(i);
      const double hi = h(i);
      const double ah = std::abs(hi);
      const double pow_nm1 = std::pow(ah, bw.n_exp - 1.0);
      dy(2 * ni + i) = -bw.delta * std::abs(vdot(i)) * pow_nm1 * hi - bw.zeta * vdot(i) * pow_nm1 * ah +
                       bw.A * vdot(i);
    }
  };

  NonlinearResponse out{Trajectory(a_g.grid(), n), Trajectory(a_g.grid(), n), Trajectory(a_g.grid(), n),
                        SimState{}};
  auto observe = [&](std::size_t step, const Vector& y) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out.displacement(i, step) = y(ii);
      out.velocity(i, step) = y(ni + ii);
      out.hysteretic(i, step) = y(2 * ni + ii);
    }
  };

  auto interstory_velocity = [&](const Vector& y, Vector& s) {
    s.resize(ni);
    for (Eigen::Index i = 0; i < ni; ++i) s(i) = y(ni + i) - (i > 0 ? y(ni + i - 1) : 0.0);
  };

  Vector y = Vector::Zero(3 * ni);
  // Velocity reversals are kinks of dh/dt; they only reach the displacements
  // when h carries part of the restoring force.
  if (bw.alpha < 1.0) {
    detail::integrate_rk4(a_g, substeps, y, rhs, observe, interstory_velocity);
  } else {
    detail::integrate_rk4(a_g, substeps, y, rhs, observe);
  }
  out.final_state = SimState{y.segment(0, ni), y.segment(ni, ni), y.segment(2 * ni, ni),
                             a_g.grid().duration()};
  return out;
}

Trajectory simulate_nonlinear(const ShearBuildingModel& model, const Trajectory& a_g, std::size_t substeps) {
  return simulate_nonlinear_states(model, a_g, substeps).displacement;
}

}  // namespace seisop::dynamics
