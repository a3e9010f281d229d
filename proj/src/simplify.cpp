#include "seisop/simplify.hpp"

#include <charconv>
#include <cmath>

#include "seisop/error.hpp"
#include "seisop/integrator.hpp"

namespace seisop::simplify {

using dynamics::ShearBuildingModel;

std::string SimplifierKind::to_string() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::ELS: return "els";
    case Kind::Modal: return "modal:" + std::to_string(param);
    case Kind::Relaxed: return "relaxed:" + std::to_string(param);
  }
  return "unknown";
}

SimplifierKind SimplifierKind::parse(std::string_view text) {
  auto read_param = [&](std::string_view digits) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
      throw InvalidArgument("simplifier: bad parameter in '" + std::string(text) + "'");
    }
    return value;
  };
  if (text == "none") return none();
  if (text == "els") return els();
  if (text.starts_with("modal:")) return modal(read_param(text.substr(6)));
  if (text.starts_with("relaxed:")) return relaxed(read_param(text.substr(8)));
  throw InvalidArgument("simplifier: expected none, els, modal:<r> or relaxed:<k>, got '" + std::string(text) +
                        "'");
}

void SimplifierKind::validate(std::size_t n_dof) const {
  if (kind == Kind::Modal && (param < 1 || param > n_dof)) {
    throw InvalidArgument("simplifier.r: must lie in [1, " + std::to_string(n_dof) + "]");
  }
  if (kind == Kind::Relaxed && param < 1) throw InvalidArgument("simplifier.k: must be >= 1");
}

Trajectory els_response(const ShearBuildingModel& model, const Trajectory& a_g, std::size_t substeps) {
  model.validate();
  const auto n = static_cast<Eigen::Index>(model.n_dof());
  const DenseMatrix k_eq = model.elastic_stiffness();
  const DenseMatrix c = dynamics::build_modal_damping(model);
  Vector inv_mass(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_mass(i) = 1.0 / model.masses[static_cast<std::size_t>(i)];
  Vector f(n);

  auto rhs = [&](double ag, const Vector& y, Vector& dy) {
    f.noalias() = k_eq * y.segment(0, n);
    f.noalias() += c * y.segment(n, n);
    dy.segment(0, n) = y.segment(n, n);
    for (Eigen::Index i = 0; i < n; ++i) dy(n + i) = -ag - inv_mass(i) * f(i);
  };
  Trajectory out(a_g.grid(), model.n_dof());
  auto observe = [&](std::size_t step, const Vector& y) {
    for (Eigen::Index i = 0; i < n; ++i) out(static_cast<std::size_t>(i), step) = y(i);
  };
  Vector y = Vector::Zero(2 * n);
  detail::integrate_rk4(a_g, substeps, y, rhs, observe);
  return out;
}

ModalReducedModel build_modal_reduced(const ShearBuildingModel& model, std::size_t r) {
  model.validate();
  if (r < 1 || r > model.n_dof()) {
    throw InvalidArgument("build_modal_reduced: r must lie in [1, " + std::to_string(model.n_dof()) + "]");
  }
  const DenseMatrix m = model.mass_matrix();
  const GeneralizedEigen eig = solve_sym_generalized_eig(model.elastic_stiffness(), m);
  const auto ri = static_cast<Eigen::Index>(r);

  ModalReducedModel red;
  red.full = model;
  red.phi = eig.vectors.leftCols(ri);
  red.full_damping = dynamics::build_modal_damping(model);
  red.mass = red.phi.transpose() * m * red.phi;
  red.damping = red.phi.transpose() * red.full_damping * red.phi;
  red.frequencies = eig.values.head(ri).cwiseSqrt();
  const Vector ones = Vector::Ones(m.rows());
  red.influence = solve_linear(red.mass, red.phi.transpose() * (m * ones));
  return red;
}

Trajectory modal_response(const ModalReducedModel& red, const Trajectory& a_g, std::size_t substeps) {
  const ShearBuildingModel& model = red.full;
  const auto n = static_cast<Eigen::Index>(model.n_dof());
  const auto r = static_cast<Eigen::Index>(red.modes());
  const auto& bw = model.hysteresis;

  DenseMatrix mass_inv(r, r);
  for (Eigen::Index j = 0; j < r; ++j) mass_inv.col(j) = solve_linear(red.mass, Vector::Unit(r, j));
  const DenseMatrix phi_t = red.phi.transpose();
  const DenseMatrix damp = mass_inv * red.damping;
  const DenseMatrix force_map = mass_inv * phi_t;

  Vector u(n), ud(n), story(n), f(n);

  // y = [q, q', h]
  auto rhs = [&](double ag, const Vector& y, Vector& dy) {
    u.noalias() = red.phi * y.segment(0, r);
    ud.noalias() = red.phi * y.segment(r, r);
    const auto h = y.segment(2 * r, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = u(i) - (i > 0 ? u(i - 1) : 0.0);
      const double vdot = ud(i) - (i > 0 ? ud(i - 1) : 0.0);
      story(i) = model.stiffnesses[static_cast<std::size_t>(i)] * (bw.alpha * v + (1.0 - bw.alpha) * h(i));
      const double ah = std::abs(h(i));
      const double pow_nm1 = std::pow(ah, bw.n_exp - 1.0);
      dy(2 * r + i) = -bw.delta * std::abs(vdot) * pow_nm1 * h(i) - bw.zeta * vdot * pow_nm1 * ah + bw.A * vdot;
    }
    for (Eigen::Index i = 0; i < n; ++i) f(i) = story(i) - (i + 1 < n ? story(i + 1) : 0.0);
    dy.segment(0, r) = y.segment(r, r);
    dy.segment(r, r).noalias() = -damp * y.segment(r, r);
    dy.segment(r, r).noalias() -= force_map * f;
    dy.segment(r, r) -= ag * red.influence;
  };

  Trajectory out(a_g.grid(), model.n_dof());
  auto observe = [&](std::size_t step, const Vector& y) {
    const Vector z = red.phi * y.segment(0, r);
    for (Eigen::Index i = 0; i < n; ++i) out(static_cast<std::size_t>(i), step) = z(i);
  };
  Vector ud_switch(n);
  auto interstory_velocity = [&](const Vector& y, Vector& s) {
    ud_switch.noalias() = red.phi * y.segment(r, r);
    s.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = ud_switch(i) - (i > 0 ? ud_switch(i - 1) : 0.0);
  };

  Vector y = Vector::Zero(2 * r + n);
  if (bw.alpha < 1.0) {
    detail::integrate_rk4(a_g, substeps, y, rhs, observe, interstory_velocity);
  } else {
    detail::integrate_rk4(a_g, substeps, y, rhs, observe);
  }
  return out;
}

std::size_t relaxed_substeps(const ShearBuildingModel& model, double dt, std::size_t k, std::size_t substeps) {
  if (k <= 1) return substeps;
  constexpr double kStableProduct = 2.0;
  const double coarse = static_cast<double>(k) * dt;
  const auto needed = static_cast<std::size_t>(std::ceil(coarse * dynamics::max_frequency(model) / kStableProduct));
  return std::max(substeps, needed);
}

Trajectory relaxed_coarse_response(const ShearBuildingModel& model, const Trajectory& a_g, std::size_t k,
                                   std::size_t substeps) {
  if (k < 1) throw InvalidArgument("relaxed_response: k must be >= 1");
  const std::size_t n_t = a_g.steps();
  if ((n_t - 1) % k != 0) {
    throw InvalidArgument("relaxed_response: (n_t - 1) = " + std::to_string(n_t - 1) + " is not divisible by k = " +
                          std::to_string(k));
  }
  const std::size_t n_coarse = (n_t - 1) / k + 1;
  Trajectory coarse_ag(TimeGrid(a_g.grid().dt() * static_cast<double>(k), n_coarse), 1);
  for (std::size_t c = 0; c < n_coarse; ++c) coarse_ag(0, c) = a_g(0, c * k);
  try {
    return dynamics::simulate_nonlinear(model, coarse_ag,
                                        relaxed_substeps(model, a_g.grid().dt(), k, substeps));
  } catch (const NumericError& e) {
    throw NumericError(std::string("relaxed solver (k = ") + std::to_string(k) + "): " + e.what());
  }
}

Trajectory relaxed_response(const ShearBuildingModel& model, const Trajectory& a_g, std::size_t k,
                            std::size_t substeps) {
  const Trajectory coarse = relaxed_coarse_response(model, a_g, k, substeps);
  if (k == 1) return coarse;
  Trajectory out(a_g.grid(), coarse.channels());
  const double inv_k = 1.0 / static_cast<double>(k);
  for (std::size_t c = 0; c < coarse.channels(); ++c) {
    for (std::size_t i = 0; i < a_g.steps(); ++i) {
      const std::size_t lo = i / k;
      const std::size_t rem = i % k;
      if (rem == 0) {
        out(c, i) = coarse(c, lo);
      } else {
        const double frac = static_cast<double>(rem) * inv_k;
        out(c, i) = (1.0 - frac) * coarse(c, lo) + frac * coarse(c, lo + 1);
      }
    }
  }
  return out;
}

Trajectory apply(const SimplifierKind& kind, const ShearBuildingModel& model, const Trajectory& a_g,
                 std::size_t substeps) {
  kind.validate(model.n_dof());
  switch (kind.kind) {
    case Kind::ELS: return els_response(model, a_g, substeps);
    case Kind::Modal: return modal_response(build_modal_reduced(model, kind.param), a_g, substeps);
    case Kind::Relaxed: return relaxed_response(model, a_g, kind.param, substeps);
    case Kind::None: break;
  }
  throw InvalidArgument("simplify::apply: no simplifier selected");
}

}  // namespace seisop::simplify
