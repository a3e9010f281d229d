#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seisop/rng.hpp"
#include "seisop/trajectory.hpp"

namespace seisop::refine {

/// Per DOF: u ~ w1 + w2 z + w3 u_hat + N(0, sigma^2).
struct RefinementModel {
  std::vector<std::array<double, 3>> weights;
  std::vector<double> sigma;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  bool ridge = false;  ///< some DOF needed the ridge fallback

  std::size_t n_dof() const { return sigma.size(); }
  friend bool operator==(const RefinementModel&, const RefinementModel&) = default;
};

/// Least-squares fit on `sample_count` (record, time) pairs drawn uniformly
/// with replacement; the same pairs serve every DOF. sigma is the RMS
/// residual (divides by the sample count). A rank-deficient design falls back
/// to (X^T X + 1e-8 tr(X^T X) I) w = X^T y and sets `ridge`.
RefinementModel fit_refinement(std::span<const Trajectory> z, std::span<const Trajectory> u_hat,
                               std::span<const Trajectory> u, std::size_t sample_count, std::uint64_t seed);

/// Pairs drawn by fit_refinement for a given seed: (record, step).
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n_records, std::size_t n_steps,
                                                              std::size_t count, std::uint64_t seed);

struct RefinedPrediction {
  Trajectory mean;
  std::vector<double> sigma;
};

RefinedPrediction refine_predict(const RefinementModel& model, const Trajectory& z, const Trajectory& u_hat);

/// Versioned JSON text block.
std::string to_json(const RefinementModel& model);
RefinementModel from_json(std::string_view text);

}  // namespace seisop::refine
