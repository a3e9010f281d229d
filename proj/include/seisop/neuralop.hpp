#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seisop/linalg.hpp"
#include "seisop/rng.hpp"

namespace seisop::neuralop {

enum class Activation : std::uint32_t { ReLU = 0 };

std::string to_string(Activation a);
Activation parse_activation(std::string_view text);

struct FnoConfig {
  std::size_t in_channels = 2;   ///< function channels + 1 time channel
  std::size_t out_channels = 1;
  std::size_t width = 64;
  std::size_t n_layers = 6;
  std::size_t n_modes = 32;
  std::size_t proj_hidden = 128;
  Activation activation = Activation::ReLU;
  /// Zero padding appended after lifting, as a fraction of the input length.
  double pad_fraction = 0.0;

  void validate() const;
  /// Length seen by the spectral layers for an input of n_t samples.
  std::size_t padded_length(std::size_t n_t) const;
  std::size_t parameter_count() const;

  friend bool operator==(const FnoConfig&, const FnoConfig&) = default;
};

/// Offsets of every parameter block inside the flat buffer, in declaration
/// order: lifting W, b; per layer spectral weights [K][out][in] as (re, im)
/// pairs, local W, b; projection W1, b1, W2, b2. Matrices are row-major
/// [out][in].
struct ParamLayout {
  std::size_t lift_w = 0, lift_b = 0;
  std::vector<std::size_t> spec, local_w, local_b;
  std::size_t proj1_w = 0, proj1_b = 0, proj2_w = 0, proj2_b = 0;
  std::size_t total = 0;

  static ParamLayout of(const FnoConfig& config);
};

/// Storage that Eigen kernels read through Maps. Over-aligned so that the
/// vectorized reductions group their sums the same way on every allocation;
/// with plain std::vector alignment, results drift in the last bit between
/// otherwise identical runs.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

class FnoParams {
 public:
  FnoParams() = default;
  explicit FnoParams(const FnoConfig& config);
  FnoParams(const FnoConfig& config, std::span<const double> values);

  const FnoConfig& config() const noexcept { return config_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  std::span<const double> values() const noexcept { return values_; }
  /// Writable view; invalidates tapes recorded with the old values.
  std::span<double> mutable_values() noexcept {
    ++version_;
    return values_;
  }
  std::size_t size() const noexcept { return values_.size(); }
  std::uint64_t version() const noexcept { return version_; }
  std::uint64_t hash() const noexcept;

  friend bool operator==(const FnoParams& a, const FnoParams& b) {
    return a.config_ == b.config_ && a.values_ == b.values_;
  }

 private:
  FnoConfig config_;
  ParamLayout layout_;
  AlignedBuffer values_;
  std::uint64_t version_ = 0;
};

/// Real tensor [batch][channels][time], row-major.
struct BatchTensor {
  std::size_t batch = 0, channels = 0, time = 0;
  AlignedBuffer data;

  BatchTensor() = default;
  BatchTensor(std::size_t b, std::size_t c, std::size_t t) : batch(b), channels(c), time(t), data(b * c * t, 0.0) {}

  double& operator()(std::size_t b, std::size_t c, std::size_t t) { return data[(b * channels + c) * time + t]; }
  double operator()(std::size_t b, std::size_t c, std::size_t t) const {
    return data[(b * channels + c) * time + t];
  }
  std::span<double> row(std::size_t b, std::size_t c) { return {data.data() + (b * channels + c) * time, time}; }
  std::span<const double> row(std::size_t b, std::size_t c) const {
    return {data.data() + (b * channels + c) * time, time};
  }

  friend bool operator==(const BatchTensor&, const BatchTensor&) = default;
};

/// c(k) = sum_t x(t) exp(-2 pi i k t / n), k < K.
std::vector<std::complex<double>> truncated_dft(std::span<const double> x, std::size_t n_modes);

/// y(t) = Re[c(0) + 2 sum_{k>=1} c(k) exp(2 pi i k t / n)] / n, with weight 1
/// for the Nyquist mode of even n.
std::vector<double> truncated_idft(std::span<const std::complex<double>> modes, std::size_t n);

/// Truncated Fourier matrices for length n and K modes.
///
/// Forward: A = X Cos, B = X Sin, so X's modes are A - iB.
/// Inverse of modes Yr + i Yi: y = Yr G1 + Yi G2, G1 = diag(c/n) Cos^T,
/// G2 = -diag(c/n) Sin^T, c = (1, 2, ..., 2) with 1 at Nyquist.
/// The adjoint of the forward map is therefore dX = dA Cos^T + dB Sin^T and of
/// the inverse dYr = dy G1^T, dYi = dy G2^T.
struct SpectralBasis {
  std::size_t n = 0, n_modes = 0;
  DenseMatrix cos, sin;  ///< n x K
  DenseMatrix g1, g2;    ///< K x n

  SpectralBasis(std::size_t n, std::size_t n_modes);
  /// Shared, cached instance.
  static std::shared_ptr<const SpectralBasis> get(std::size_t n, std::size_t n_modes);
};

/// Activations kept by fno_forward for fno_backward.
struct FnoTape {
  const FnoParams* params = nullptr;
  std::uint64_t version = 0;
  std::size_t batch = 0, n_t = 0, n_pad = 0;
  std::shared_ptr<const SpectralBasis> basis;
  DenseMatrix input;                 ///< (B in) x n_t
  std::vector<DenseMatrix> v;        ///< L + 1 entries, (B width) x n_pad
  std::vector<DenseMatrix> re, im;   ///< per layer, (B width) x K
  DenseMatrix hidden;                ///< (B hidden) x n_t, after activation
};

/// Lifting, L spectral layers, projection. Channels of `input` must equal
/// config.in_channels with normalized time last. `tape` may be null.
BatchTensor fno_forward(const FnoParams& params, const BatchTensor& input, FnoTape* tape = nullptr);

/// Parameter gradient for d(loss)/d(output) = `grad_out`, laid out like the
/// parameter buffer. Throws InvalidArgument if the tape is stale.
std::vector<double> fno_backward(const FnoParams& params, const FnoTape& tape, const BatchTensor& grad_out);

struct LossResult {
  double value = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  BatchTensor grad;
};

/// sum_j sum_i ||pred_ij - target_ij|| / sum_j sum_i ||target_ij|| over
/// records j and channels i, with its gradient with respect to pred.
LossResult relative_l2_loss(const BatchTensor& pred, const BatchTensor& target);

struct AdamState {
  std::vector<double> m, v;
  std::uint64_t step = 0;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(FnoParams& params, std::span<const double> grads, AdamState& state, double lr,
               const AdamOptions& options = {});

/// Affine weights and biases uniform in +-1/sqrt(fan_in); spectral weights
/// (re and im) uniform in [0, 1/width^2).
FnoParams init_params(const FnoConfig& config, RngStream& rng);

}  // namespace seisop::neuralop
