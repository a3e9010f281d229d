#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seisop/trajectory.hpp"

namespace seisop::metrics {

/// Per-DOF sqrt(sum_j sum_k (pred - target)^2 / (N_t n_t)) over records j.
std::vector<double> rmse(std::span<const Trajectory> preds, std::span<const Trajectory> targets);

/// Per-DOF pooled ratio sqrt(sum_j sum_k (pred - target)^2) / sqrt(sum_j sum_k target^2).
/// Throws InvalidArgument for a DOF whose targets are identically zero.
std::vector<double> relative_l2(std::span<const Trajectory> preds, std::span<const Trajectory> targets);

/// peaks[i][j] = max_k |u_i^(j)(t_k)|.
std::vector<std::vector<double>> peak_distribution(std::span<const Trajectory> trajectories);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Metrics of one model in one run.
struct MetricReport {
  std::string model;
  std::uint64_t seed = 0;
  std::size_t n_records = 0;  ///< N_t
  std::size_t n_steps = 0;    ///< n_t
  std::vector<double> rmse;
  std::vector<double> relative_l2;
  std::optional<std::vector<double>> sigma;  ///< refinement residual std
};

MetricReport evaluate(std::string model, std::uint64_t seed, std::span<const Trajectory> preds,
                      std::span<const Trajectory> targets);

/// Per-model means over runs, in order of first appearance.
struct AggregateRow {
  std::string model;
  std::size_t runs = 0;
  std::size_t n_records = 0;
  std::size_t n_steps = 0;
  std::vector<double> rmse;
  std::vector<double> relative_l2;
  std::optional<std::vector<double>> sigma;
};

/// Rejects runs of one model that disagree on N_t, n_t, DOF count or on
/// whether sigma is present.
std::vector<AggregateRow> assemble_report(std::span<const MetricReport> runs);

/// model,story,rmse,relative_l2[,sigma],runs
std::string report_csv(std::span<const AggregateRow> rows);
std::string report_json(std::span<const AggregateRow> rows);

}  // namespace seisop::metrics
