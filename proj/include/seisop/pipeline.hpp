#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seisop/config.hpp"
#include "seisop/dataset.hpp"
#include "seisop/neuralop.hpp"
#include "seisop/refine.hpp"

namespace seisop {

/// Baseline: input [a_g, t/tau]. Composite: input [z_1..z_n, t/tau].
enum class Mode : std::uint32_t { Baseline = 0, Composite = 1 };

std::string to_string(Mode m);
Mode parse_mode(std::string_view text);

/// Per-channel z-score.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> std;

  /// Statistics over every record and time step; a zero spread is replaced by 1.
  static ChannelStats fit(std::span<const Trajectory* const> data);
  void normalize(std::span<double> values, std::size_t channel) const;
  void denormalize(std::span<double> values, std::size_t channel) const;

  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

struct Normalization {
  ChannelStats input;   ///< function channels only; time is t/tau
  ChannelStats output;  ///< displacement channels

  static Normalization fit(const PairedDataset& train, Mode mode);
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

/// Function channels used as network input for a record.
const Trajectory& input_function(const Record& r, Mode mode);

/// [records][channels][time] network input.
neuralop::BatchTensor assemble_inputs(Mode mode, const Normalization& norm, std::span<const Record* const> records);

struct EpochLoss {
  double train = 0.0;
  double validation = 0.0;
  friend bool operator==(const EpochLoss&, const EpochLoss&) = default;
};

struct Checkpoint {
  Mode mode = Mode::Composite;
  neuralop::FnoParams params;
  Normalization norm;
  std::vector<EpochLoss> history;
  std::uint32_t best_epoch = 0;
  std::uint64_t seed = 0;
  /// Simplifier, grid, provenance, optional refinement block.
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  simplify::SimplifierKind simplifier() const;
  TimeGrid grid() const;
  std::size_t n_dof() const { return params.config().out_channels; }
  std::optional<refine::RefinementModel> refinement() const;
  void set_refinement(const refine::RefinementModel& model);
  /// Experiment configuration recorded by the caller, if any.
  std::optional<ExperimentConfig> config() const;
  void set_config(const ExperimentConfig& config);
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochLoss& loss)>;

/// Mini-batch Adam on the relative L2 training loss, evaluated on denormalized
/// outputs. Keeps the parameters of the epoch with the lowest validation loss
/// (training loss when `validation` is empty). Throws NumericError naming the
/// epoch if the loss stops being finite.
Checkpoint train(const PairedDataset& train_set, const PairedDataset& validation, const NetworkConfig& network,
                 const TrainingConfig& training, std::uint64_t seed, Mode mode, const EpochCallback& on_epoch = {});

/// Training loss (relative L2, physical units) of the checkpoint over a dataset.
double dataset_loss(const Checkpoint& ckpt, const PairedDataset& data);

/// Denormalized prediction. Composite checkpoints use `z` when given and
/// otherwise run the recorded simplifier on the recorded model.
Trajectory predict(const Checkpoint& ckpt, const Trajectory& a_g, const Trajectory* z = nullptr);

/// Predictions for every record, in order, using stored z where present.
std::vector<Trajectory> predict_dataset(const Checkpoint& ckpt, const PairedDataset& data);

/// FNO1 container:
///   "FNO1", u32 version = 1,
///   u32 in, out, width, layers, modes, hidden, activation; f64 pad fraction,
///   u32 mode,
///   u32 n_in, f64 mean[n_in], f64 std[n_in], u32 n_out, f64 mean[n_out], f64 std[n_out],
///   u64 parameter count, f64 parameters (declaration order, complex as re, im),
///   u32 epochs, (f64 train, f64 validation) per epoch, u32 best epoch, u64 seed,
///   u32 metadata length, metadata JSON text.
/// All little-endian.
std::string encode_fno1(const Checkpoint& ckpt);
Checkpoint decode_fno1(std::string_view bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace seisop
