#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "seisop/dynamics.hpp"
#include "seisop/excitation.hpp"
#include "seisop/neuralop.hpp"
#include "seisop/simplify.hpp"

namespace seisop {

/// Network hyperparameters; channel counts follow from the data.
struct NetworkConfig {
  std::size_t width = 64;
  std::size_t layers = 6;
  std::size_t modes = 32;
  std::size_t projection_hidden = 128;
  neuralop::Activation activation = neuralop::Activation::ReLU;
  double pad_fraction = 0.0;

  neuralop::FnoConfig fno(std::size_t in_channels, std::size_t out_channels) const;
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Adam with step decay: lr = learning_rate * decay^floor(epoch / decay_every).
struct TrainingConfig {
  std::size_t batch = 20;
  std::size_t epochs = 300;
  double learning_rate = 1e-3;
  double decay = 0.5;
  std::size_t decay_every = 100;

  double rate_at(std::size_t epoch) const;
  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct SplitConfig {
  std::size_t train = 400;
  std::size_t validation = 100;
  std::size_t test = 200;

  std::size_t total() const { return train + validation + test; }
  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

struct ExperimentConfig {
  dynamics::ShearBuildingModel model = dynamics::ShearBuildingModel::reference();
  std::size_t substeps = 4;
  excitation::WhiteNoiseSpec excitation = excitation::WhiteNoiseSpec::reference();
  simplify::SimplifierKind simplifier = simplify::SimplifierKind::els();
  NetworkConfig network;
  TrainingConfig training;
  SplitConfig splits;
  std::uint64_t seed = 1;
  std::size_t refinement_samples = 1000;
  std::string output_dir = "runs";

  void validate() const;

  /// dt 0.01 s, 3001 steps, width 64, 6 layers, 32 modes, 400/100/200.
  static ExperimentConfig full();
  /// dt 0.02 s, 1501 steps, width 32, 4 layers, 16 modes, 100/25/50, 150 epochs.
  static ExperimentConfig desk();
};

/// Parses JSON text. Missing keys take the full() defaults, or the desk()
/// defaults when the document has "preset": "desk". Unknown keys and type
/// errors throw InvalidArgument with the path of the offending value, e.g.
/// "config.excitation.d_omega: must be > 0".
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON (every field written, stable key order).
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

/// Hash of the blocks that determine simulated data: model, integration,
/// excitation.
std::uint64_t physics_hash(const ExperimentConfig& config);

}  // namespace seisop
