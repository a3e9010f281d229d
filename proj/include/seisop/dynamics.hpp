#pragma once

#include <span>
#include <vector>

#include "seisop/linalg.hpp"
#include "seisop/trajectory.hpp"

namespace seisop::dynamics {

/// Bouc-Wen story hysteresis:
///   r = k (alpha v + (1 - alpha) h)
///   dh/dt = -delta |dv| |h|^(n-1) h - zeta dv |h|^n + A dv
struct BoucWenParams {
  double alpha = 0.1;
  double n_exp = 3.0;
  double A = 1.0;
  double delta = 0.0;  ///< m^-n
  double zeta = 0.0;   ///< m^-n
  double u_y = 0.01;   ///< yield displacement, m

  /// delta = zeta = 1 / (2 u_y^n)
  static BoucWenParams with_yield(double u_y, double alpha = 0.1, double n_exp = 3.0, double A = 1.0);
  /// Largest reachable |h|, (A / (delta + zeta))^(1/n).
  double ultimate_hysteretic() const;
  void validate() const;
};

/// Lumped-mass shear building; story i connects floor i to floor i-1 (floor 0
/// is the ground). Displacements are relative to the ground.
struct ShearBuildingModel {
  std::vector<double> masses;       ///< kg, story 1 first
  std::vector<double> stiffnesses;  ///< N/m
  double damping_ratio = 0.05;      ///< fraction of critical, every mode
  BoucWenParams hysteresis;

  std::size_t n_dof() const { return masses.size(); }
  DenseMatrix mass_matrix() const;
  /// K = A_f^T diag(k) A_f
  DenseMatrix elastic_stiffness() const;
  /// A_f: v = A_f u with v_1 = u_1, v_i = u_i - u_{i-1}.
  DenseMatrix compatibility() const;
  void validate() const;

  /// Five stories, 3.0e4 kg per floor, k = 5.0e7 N/m per story (T1 about
  /// 0.54 s), 5 % damping, alpha = 0.1, n = 3, A = 1, u_y = 0.01 m.
  static ShearBuildingModel reference();
};

/// C = M Phi diag(2 zeta w) Phi^T M with mass-normalized elastic modes.
DenseMatrix build_modal_damping(const ShearBuildingModel& model);

/// Story shears r_i = k_i (alpha v_i + (1 - alpha) h_i).
std::vector<double> restoring_force(const ShearBuildingModel& model, std::span<const double> v,
                                    std::span<const double> h);

/// Nodal forces A_f^T r: story i shear acts on floor i (+) and floor i-1 (-).
std::vector<double> nodal_forces(std::span<const double> story_shears);

struct SimState {
  Vector u;
  Vector udot;
  Vector h;
  double t = 0.0;
};

struct NonlinearResponse {
  Trajectory displacement;
  Trajectory velocity;
  Trajectory hysteretic;
  SimState final_state;
};

/// Integrates M u'' + C u' + A_f^T r(u, h) = -M 1 a_g together with the
/// Bouc-Wen evolution, classical RK4 at dt/substeps, zero initial state.
NonlinearResponse simulate_nonlinear_states(const ShearBuildingModel& model, const Trajectory& a_g,
                                            std::size_t substeps = 1);

/// Displacement channels of simulate_nonlinear_states.
Trajectory simulate_nonlinear(const ShearBuildingModel& model, const Trajectory& a_g,
                              std::size_t substeps = 1);

/// Largest undamped circular frequency of the elastic model.
double max_frequency(const ShearBuildingModel& model);

}  // namespace seisop::dynamics
