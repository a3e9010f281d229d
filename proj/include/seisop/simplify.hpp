#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "seisop/dynamics.hpp"
#include "seisop/linalg.hpp"
#include "seisop/trajectory.hpp"

namespace seisop::simplify {

enum class Kind : std::uint32_t { None = 0, ELS = 1, Modal = 2, Relaxed = 3 };

/// Which intermediate model produces z(t), and its parameter
/// (retained modes r for Modal, step multiplier k for Relaxed).
struct SimplifierKind {
  Kind kind = Kind::None;
  std::size_t param = 0;

  static SimplifierKind none() { return {Kind::None, 0}; }
  static SimplifierKind els() { return {Kind::ELS, 0}; }
  static SimplifierKind modal(std::size_t r) { return {Kind::Modal, r}; }
  static SimplifierKind relaxed(std::size_t k) { return {Kind::Relaxed, k}; }

  /// "none", "els", "modal:<r>", "relaxed:<k>"
  std::string to_string() const;
  static SimplifierKind parse(std::string_view text);
  void validate(std::size_t n_dof) const;

  friend bool operator==(const SimplifierKind&, const SimplifierKind&) = default;
};

/// Linear model with the initial elastic stiffness: M z'' + C z' + K z = -M 1 a_g.
Trajectory els_response(const dynamics::ShearBuildingModel& model, const Trajectory& a_g,
                        std::size_t substeps = 1);

/// Projection of the full model on its r lowest mass-normalized elastic modes.
struct ModalReducedModel {
  dynamics::ShearBuildingModel full;
  DenseMatrix phi;         ///< n_d x r
  DenseMatrix mass;        ///< Phi^T M Phi
  DenseMatrix damping;     ///< Phi^T C Phi
  Vector influence;        ///< M_r^-1 Phi^T M 1
  Vector frequencies;      ///< retained circular frequencies, rad/s
  DenseMatrix full_damping;

  std::size_t modes() const { return static_cast<std::size_t>(phi.cols()); }
};

ModalReducedModel build_modal_reduced(const dynamics::ShearBuildingModel& model, std::size_t r);

/// Integrates the reduced equations; Bouc-Wen states stay at story level and
/// are driven by the deformations of Phi q. Returns z = Phi q.
Trajectory modal_response(const ModalReducedModel& reduced, const Trajectory& a_g, std::size_t substeps = 1);

/// RK4 substeps per coarse interval used by the relaxed solver: `substeps`
/// for k = 1, otherwise the smallest count >= substeps that keeps
/// w_max * h <= 2 for the coarse step h = k dt / count.
std::size_t relaxed_substeps(const dynamics::ShearBuildingModel& model, double dt, std::size_t k,
                             std::size_t substeps);

/// Full nonlinear solution on the grid decimated by k (every k-th excitation
/// sample). Requires (n_t - 1) divisible by k.
Trajectory relaxed_coarse_response(const dynamics::ShearBuildingModel& model, const Trajectory& a_g,
                                   std::size_t k, std::size_t substeps = 1);

/// relaxed_coarse_response linearly interpolated back to the input grid.
Trajectory relaxed_response(const dynamics::ShearBuildingModel& model, const Trajectory& a_g, std::size_t k,
                            std::size_t substeps = 1);

/// Dispatches on kind. Kind::None is rejected.
Trajectory apply(const SimplifierKind& kind, const dynamics::ShearBuildingModel& model, const Trajectory& a_g,
                 std::size_t substeps = 1);

}  // namespace seisop::simplify
