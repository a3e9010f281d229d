#include "seisop/neuralop.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "seisop/error.hpp"

namespace seisop::neuralop {

namespace {

using Map = Eigen::Map<DenseMatrix>;
using ConstMap = Eigen::Map<const DenseMatrix>;
using Index = Eigen::Index;

Index ix(std::size_t v) { return static_cast<Index>(v); }

double fourier_angle(std::size_t k, std::size_t t, std::size_t n) {
  // Reduce k t mod n first so the angle is exact for long records.
  const auto r = static_cast<double>((static_cast<unsigned long long>(k) * t) % n);
  return 2.0 * std::numbers::pi * r / static_cast<double>(n);
}

void check_modes(std::size_t n, std::size_t n_modes, const char* what) {
  if (n == 0) throw InvalidArgument(std::string(what) + ": empty signal");
  if (n_modes < 1 || n_modes > n / 2 + 1) {
    throw InvalidArgument(std::string(what) + ": K = " + std::to_string(n_modes) + " must lie in [1, " +
                          std::to_string(n / 2 + 1) + "] for n = " + std::to_string(n));
  }
}

// Spectral weights of one layer as K stacked (width x width) blocks.
void load_spectral(const FnoParams& p, std::size_t layer, DenseMatrix& wr, DenseMatrix& wi) {
  const auto& c = p.config();
  const std::size_t w = c.width;
  wr.resize(ix(c.n_modes * w), ix(w));
  wi.resize(ix(c.n_modes * w), ix(w));
  const double* s = p.values().data() + p.layout().spec[layer];
  for (std::size_t r = 0; r < c.n_modes * w; ++r) {
    for (std::size_t i = 0; i < w; ++i) {
      wr(ix(r), ix(i)) = s[2 * (r * w + i)];
      wi(ix(r), ix(i)) = s[2 * (r * w + i) + 1];
    }
  }
}

void add_bias(DenseMatrix& m, std::size_t batch, std::size_t rows, const double* bias) {
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t r = 0; r < rows; ++r) m.row(ix(b * rows + r)).array() += bias[r];
  }
}

void relu(DenseMatrix& m) { m = m.cwiseMax(0.0); }

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
  }
  return "unknown";
}

Activation parse_activation(std::string_view text) {
  if (text == "relu") return Activation::ReLU;
  throw InvalidArgument("activation: expected 'relu', got '" + std::string(text) + "'");
}

void FnoConfig::validate() const {
  if (in_channels < 1) throw InvalidArgument("network.in_channels: must be >= 1");
  if (out_channels < 1) throw InvalidArgument("network.out_channels: must be >= 1");
  if (width < 1) throw InvalidArgument("network.width: must be >= 1");
  if (n_layers < 1) throw InvalidArgument("network.layers: must be >= 1");
  if (n_modes < 1) throw InvalidArgument("network.modes: must be >= 1");
  if (proj_hidden < 1) throw InvalidArgument("network.projection_hidden: must be >= 1");
  if (!(pad_fraction >= 0.0 && pad_fraction <= 4.0)) {
    throw InvalidArgument("network.pad_fraction: must lie in [0, 4]");
  }
}

std::size_t FnoConfig::padded_length(std::size_t n_t) const {
  return n_t + static_cast<std::size_t>(std::llround(pad_fraction * static_cast<double>(n_t)));
}

ParamLayout ParamLayout::of(const FnoConfig& c) {
  ParamLayout l;
  std::size_t at = 0;
  auto take = [&](std::size_t count) {
    const std::size_t here = at;
    at += count;
    return here;
  };
  l.lift_w = take(c.width * c.in_channels);
  l.lift_b = take(c.width);
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    l.spec.push_back(take(2 * c.n_modes * c.width * c.width));
    l.local_w.push_back(take(c.width * c.width));
    l.local_b.push_back(take(c.width));
  }
  l.proj1_w = take(c.proj_hidden * c.width);
  l.proj1_b = take(c.proj_hidden);
  l.proj2_w = take(c.out_channels * c.proj_hidden);
  l.proj2_b = take(c.out_channels);
  l.total = at;
  return l;
}

std::size_t FnoConfig::parameter_count() const { return ParamLayout::of(*this).total; }

FnoParams::FnoParams(const FnoConfig& config)
    : config_(config), layout_(ParamLayout::of(config)), values_(layout_.total, 0.0) {
  config_.validate();
}

FnoParams::FnoParams(const FnoConfig& config, std::span<const double> values)
    : config_(config), layout_(ParamLayout::of(config)), values_(values.begin(), values.end()) {
  config_.validate();
  if (values_.size() != layout_.total) {
    throw InvalidArgument("FnoParams: expected " + std::to_string(layout_.total) + " values, got " +
                          std::to_string(values_.size()));
  }
}

std::uint64_t FnoParams::hash() const noexcept { return fnv1a(values_.data(), values_.size() * sizeof(double)); }

std::vector<std::complex<double>> truncated_dft(std::span<const double> x, std::size_t n_modes) {
  const std::size_t n = x.size();
  check_modes(n, n_modes, "truncated_dft");
  std::vector<std::complex<double>> out(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = fourier_angle(k, t, n);
      re += x[t] * std::cos(a);
      im -= x[t] * std::sin(a);
    }
    out[k] = {re, im};
  }
  return out;
}

std::vector<double> truncated_idft(std::span<const std::complex<double>> modes, std::size_t n) {
  check_modes(n, modes.size(), "truncated_idft");
  std::vector<double> y(n, 0.0);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const bool single = k == 0 || 2 * k == n;
    const double c = (single ? 1.0 : 2.0) / static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double a = fourier_angle(k, t, n);
      y[t] += c * (modes[k].real() * std::cos(a) - modes[k].imag() * std::sin(a));
    }
  }
  return y;
}

SpectralBasis::SpectralBasis(std::size_t n_, std::size_t k_) : n(n_), n_modes(k_) {
  check_modes(n, n_modes, "SpectralBasis");
  cos.resize(ix(n), ix(n_modes));
  sin.resize(ix(n), ix(n_modes));
  g1.resize(ix(n_modes), ix(n));
  g2.resize(ix(n_modes), ix(n));
  for (std::size_t k = 0; k < n_modes; ++k) {
    const double c = ((k == 0 || 2 * k == n) ? 1.0 : 2.0) / static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double a = fourier_angle(k, t, n);
      const double ca = std::cos(a), sa = std::sin(a);
      cos(ix(t), ix(k)) = ca;
      sin(ix(t), ix(k)) = sa;
      g1(ix(k), ix(t)) = c * ca;
      g2(ix(k), ix(t)) = -c * sa;
    }
  }
}

std::shared_ptr<const SpectralBasis> SpectralBasis::get(std::size_t n, std::size_t n_modes) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const SpectralBasis>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{n, n_modes}];
  if (!slot) slot = std::make_shared<const SpectralBasis>(n, n_modes);
  return slot;
}

BatchTensor fno_forward(const FnoParams& params, const BatchTensor& input, FnoTape* tape) {
  const FnoConfig& c = params.config();
  const ParamLayout& lay = params.layout();
  if (input.channels != c.in_channels) {
    throw InvalidArgument("fno_forward: channel axis has " + std::to_string(input.channels) + " entries, expected " +
                          std::to_string(c.in_channels));
  }
  if (input.batch < 1) throw InvalidArgument("fno_forward: batch axis is empty");
  if (input.time < 2) throw InvalidArgument("fno_forward: time axis needs at least 2 samples");
  if (input.data.size() != input.batch * input.channels * input.time) {
    throw InvalidArgument("fno_forward: data size does not match batch x channels x time");
  }
  const std::size_t batch = input.batch, n = input.time, w = c.width, np = c.padded_length(n);
  if (c.n_modes > np / 2 + 1) {
    throw InvalidArgument("fno_forward: K = " + std::to_string(c.n_modes) + " exceeds floor(n/2)+1 = " +
                          std::to_string(np / 2 + 1) + " for time axis length " + std::to_string(np));
  }
  const double* p = params.values().data();
  auto basis = SpectralBasis::get(np, c.n_modes);

  FnoTape local;
  FnoTape& tp = tape ? *tape : local;
  tp = FnoTape{};
  tp.params = &params;
  tp.version = params.version();
  tp.batch = batch;
  tp.n_t = n;
  tp.n_pad = np;
  tp.basis = basis;
  tp.input = ConstMap(input.data.data(), ix(batch * c.in_channels), ix(n));

  // Lifting.
  const ConstMap lift_w(p + lay.lift_w, ix(w), ix(c.in_channels));
  DenseMatrix v0 = DenseMatrix::Zero(ix(batch * w), ix(np));
  for (std::size_t b = 0; b < batch; ++b) {
    v0.middleRows(ix(b * w), ix(w)).leftCols(ix(n)).noalias() =
        lift_w * tp.input.middleRows(ix(b * c.in_channels), ix(c.in_channels));
    for (std::size_t r = 0; r < w; ++r) v0.row(ix(b * w + r)).leftCols(ix(n)).array() += p[lay.lift_b + r];
  }
  tp.v.push_back(std::move(v0));

  // Every product below acts on one record at a time, so a record's output
  // does not depend on the batch it is evaluated in.
  DenseMatrix wr, wi, re_b, im_b, yr_b, yi_b;
  const std::size_t nk = c.n_modes;
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    const DenseMatrix& x = tp.v.back();
    load_spectral(params, l, wr, wi);
    const ConstMap loc(p + lay.local_w[l], ix(w), ix(w));
    DenseMatrix re(ix(batch * w), ix(nk)), im(ix(batch * w), ix(nk));
    DenseMatrix next(ix(batch * w), ix(np));
    yr_b.resize(ix(w), ix(nk));
    yi_b.resize(ix(w), ix(nk));
    for (std::size_t b = 0; b < batch; ++b) {
      const auto xb = x.middleRows(ix(b * w), ix(w));
      re_b.noalias() = xb * basis->cos;
      im_b.noalias() = xb * basis->sin;  // modes are re - i im
      for (std::size_t k = 0; k < nk; ++k) {
        const auto wr_k = wr.middleRows(ix(k * w), ix(w));
        const auto wi_k = wi.middleRows(ix(k * w), ix(w));
        const Vector a = re_b.col(ix(k)), bb = im_b.col(ix(k));
        yr_b.col(ix(k)).noalias() = wr_k * a + wi_k * bb;
        yi_b.col(ix(k)).noalias() = wi_k * a - wr_k * bb;
      }
      auto nb = next.middleRows(ix(b * w), ix(w));
      nb.noalias() = yr_b * basis->g1;
      nb.noalias() += yi_b * basis->g2;
      nb.noalias() += loc * xb;
      re.middleRows(ix(b * w), ix(w)) = re_b;
      im.middleRows(ix(b * w), ix(w)) = im_b;
    }
    add_bias(next, batch, w, p + lay.local_b[l]);
    relu(next);
    tp.re.push_back(std::move(re));
    tp.im.push_back(std::move(im));
    tp.v.push_back(std::move(next));
  }

  // Projection on the unpadded window.
  const std::size_t hid = c.proj_hidden, out_ch = c.out_channels;
  const ConstMap p1(p + lay.proj1_w, ix(hid), ix(w));
  const ConstMap p2(p + lay.proj2_w, ix(out_ch), ix(hid));
  const DenseMatrix& top = tp.v.back();
  tp.hidden.resize(ix(batch * hid), ix(n));
  for (std::size_t b = 0; b < batch; ++b) {
    tp.hidden.middleRows(ix(b * hid), ix(hid)).noalias() = p1 * top.middleRows(ix(b * w), ix(w)).leftCols(ix(n));
  }
  add_bias(tp.hidden, batch, hid, p + lay.proj1_b);
  relu(tp.hidden);
  BatchTensor out(batch, out_ch, n);
  Map om(out.data.data(), ix(batch * out_ch), ix(n));
  for (std::size_t b = 0; b < batch; ++b) {
    om.middleRows(ix(b * out_ch), ix(out_ch)).noalias() = p2 * tp.hidden.middleRows(ix(b * hid), ix(hid));
    for (std::size_t r = 0; r < out_ch; ++r) om.row(ix(b * out_ch + r)).array() += p[lay.proj2_b + r];
  }
  if (!tape) tp = FnoTape{};
  return out;
}

std::vector<double> fno_backward(const FnoParams& params, const FnoTape& tape, const BatchTensor& grad_out) {
  if (tape.params != &params || tape.version != params.version() || tape.v.empty()) {
    throw InvalidArgument("fno_backward: tape is stale (parameters changed since the forward pass)");
  }
  const FnoConfig& c = params.config();
  const ParamLayout& lay = params.layout();
  const std::size_t batch = tape.batch, n = tape.n_t, w = c.width, hid = c.proj_hidden, out_ch = c.out_channels;
  if (grad_out.batch != batch || grad_out.channels != out_ch || grad_out.time != n) {
    throw InvalidArgument("fno_backward: output gradient shape does not match the tape");
  }
  const double* p = params.values().data();
  AlignedBuffer g(lay.total, 0.0);
  const SpectralBasis& basis = *tape.basis;

  const ConstMap dout(grad_out.data.data(), ix(batch * out_ch), ix(n));
  const ConstMap p1(p + lay.proj1_w, ix(hid), ix(w));
  const ConstMap p2(p + lay.proj2_w, ix(out_ch), ix(hid));
  Map dp1(g.data() + lay.proj1_w, ix(hid), ix(w));
  Map dp2(g.data() + lay.proj2_w, ix(out_ch), ix(hid));
  const DenseMatrix& top = tape.v.back();
  DenseMatrix dv = DenseMatrix::Zero(ix(batch * w), ix(tape.n_pad));
  DenseMatrix dh;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto h = tape.hidden.middleRows(ix(b * hid), ix(hid));
    const auto d = dout.middleRows(ix(b * out_ch), ix(out_ch));
    dp2.noalias() += d * h.transpose();
    for (std::size_t r = 0; r < out_ch; ++r) g[lay.proj2_b + r] += d.row(ix(r)).sum();
    dh.noalias() = p2.transpose() * d;
    dh = (h.array() > 0.0).select(dh, 0.0);
    const auto x = top.middleRows(ix(b * w), ix(w)).leftCols(ix(n));
    dp1.noalias() += dh * x.transpose();
    for (std::size_t r = 0; r < hid; ++r) g[lay.proj1_b + r] += dh.row(ix(r)).sum();
    dv.middleRows(ix(b * w), ix(w)).leftCols(ix(n)).noalias() = p1.transpose() * dh;
  }

  DenseMatrix wr, wi, dyr_b, dyi_b, da_b, db_b, dwr, dwi;
  const std::size_t nk = c.n_modes;
  for (std::size_t l = c.n_layers; l-- > 0;) {
    const DenseMatrix& x = tape.v[l];
    const DenseMatrix& y = tape.v[l + 1];
    const DenseMatrix dpre = (y.array() > 0.0).select(dv, 0.0);
    load_spectral(params, l, wr, wi);
    dwr = DenseMatrix::Zero(ix(nk * w), ix(w));
    dwi = DenseMatrix::Zero(ix(nk * w), ix(w));
    da_b.resize(ix(w), ix(nk));
    db_b.resize(ix(w), ix(nk));

    const ConstMap loc(p + lay.local_w[l], ix(w), ix(w));
    Map dloc(g.data() + lay.local_w[l], ix(w), ix(w));
    DenseMatrix dx(ix(batch * w), ix(tape.n_pad));
    for (std::size_t b = 0; b < batch; ++b) {
      const auto dp = dpre.middleRows(ix(b * w), ix(w));
      dloc.noalias() += dp * x.middleRows(ix(b * w), ix(w)).transpose();
      for (std::size_t r = 0; r < w; ++r) g[lay.local_b[l] + r] += dp.row(ix(r)).sum();
      auto dxb = dx.middleRows(ix(b * w), ix(w));
      dxb.noalias() = loc.transpose() * dp;

      dyr_b.noalias() = dp * basis.g1.transpose();
      dyi_b.noalias() = dp * basis.g2.transpose();
      const auto re_b = tape.re[l].middleRows(ix(b * w), ix(w));
      const auto im_b = tape.im[l].middleRows(ix(b * w), ix(w));
      for (std::size_t k = 0; k < nk; ++k) {
        const Vector a = re_b.col(ix(k)), bb = im_b.col(ix(k));
        const Vector dr = dyr_b.col(ix(k)), di = dyi_b.col(ix(k));
        auto dwr_k = dwr.middleRows(ix(k * w), ix(w));
        auto dwi_k = dwi.middleRows(ix(k * w), ix(w));
        dwr_k.noalias() += dr * a.transpose() - di * bb.transpose();
        dwi_k.noalias() += dr * bb.transpose() + di * a.transpose();
        const auto wr_k = wr.middleRows(ix(k * w), ix(w));
        const auto wi_k = wi.middleRows(ix(k * w), ix(w));
        da_b.col(ix(k)).noalias() = wr_k.transpose() * dr + wi_k.transpose() * di;
        db_b.col(ix(k)).noalias() = wi_k.transpose() * dr - wr_k.transpose() * di;
      }
      dxb.noalias() += da_b * basis.cos.transpose();
      dxb.noalias() += db_b * basis.sin.transpose();
    }
    double* gs = g.data() + lay.spec[l];
    for (std::size_t r = 0; r < nk * w; ++r) {
      for (std::size_t i = 0; i < w; ++i) {
        gs[2 * (r * w + i)] += dwr(ix(r), ix(i));
        gs[2 * (r * w + i) + 1] += dwi(ix(r), ix(i));
      }
    }
    dv = std::move(dx);
  }

  Map dlift(g.data() + lay.lift_w, ix(w), ix(c.in_channels));
  for (std::size_t b = 0; b < batch; ++b) {
    const auto d = dv.middleRows(ix(b * w), ix(w)).leftCols(ix(n));
    dlift.noalias() += d * tape.input.middleRows(ix(b * c.in_channels), ix(c.in_channels)).transpose();
    for (std::size_t r = 0; r < w; ++r) g[lay.lift_b + r] += d.row(ix(r)).sum();
  }
  return {g.begin(), g.end()};
}

LossResult relative_l2_loss(const BatchTensor& pred, const BatchTensor& target) {
  if (pred.batch != target.batch || pred.channels != target.channels || pred.time != target.time) {
    throw InvalidArgument("relative_l2_loss: prediction and target shapes differ");
  }
  LossResult r;
  r.grad = BatchTensor(pred.batch, pred.channels, pred.time);
  std::vector<double> err_norm(pred.batch * pred.channels);
  for (std::size_t b = 0; b < pred.batch; ++b) {
    for (std::size_t c = 0; c < pred.channels; ++c) {
      const auto ps = pred.row(b, c);
      const auto ts = target.row(b, c);
      double e2 = 0.0, t2 = 0.0;
      for (std::size_t t = 0; t < pred.time; ++t) {
        const double d = ps[t] - ts[t];
        e2 += d * d;
        t2 += ts[t] * ts[t];
      }
      err_norm[b * pred.channels + c] = std::sqrt(e2);
      r.numerator += std::sqrt(e2);
      r.denominator += std::sqrt(t2);
    }
  }
  if (!(r.denominator > 0.0)) throw InvalidArgument("relative_l2_loss: every target channel has zero norm");
  r.value = r.numerator / r.denominator;
  for (std::size_t b = 0; b < pred.batch; ++b) {
    for (std::size_t c = 0; c < pred.channels; ++c) {
      const double e = err_norm[b * pred.channels + c];
      if (e == 0.0) continue;
      const double scale = 1.0 / (e * r.denominator);
      const auto ps = pred.row(b, c);
      const auto ts = target.row(b, c);
      auto gs = r.grad.row(b, c);
      for (std::size_t t = 0; t < pred.time; ++t) gs[t] = (ps[t] - ts[t]) * scale;
    }
  }
  return r;
}

void adam_step(FnoParams& params, std::span<const double> grads, AdamState& state, double lr,
               const AdamOptions& o) {
  const std::size_t n = params.size();
  if (grads.size() != n) throw InvalidArgument("adam_step: gradient size does not match parameters");
  if (state.m.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  if (state.m.size() != n || state.v.size() != n) throw InvalidArgument("adam_step: state size mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  auto p = params.mutable_values();
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * grads[i];
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * grads[i] * grads[i];
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    p[i] -= lr * mh / (std::sqrt(vh) + o.eps);
  }
}

FnoParams init_params(const FnoConfig& config, RngStream& rng) {
  FnoParams params(config);
  const ParamLayout& lay = params.layout();
  auto v = params.mutable_values();
  auto affine = [&](std::size_t w_at, std::size_t b_at, std::size_t rows, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < rows * fan_in; ++i) v[w_at + i] = rng.uniform(-bound, bound);
    for (std::size_t i = 0; i < rows; ++i) v[b_at + i] = rng.uniform(-bound, bound);
  };
  const std::size_t w = config.width;
  affine(lay.lift_w, lay.lift_b, w, config.in_channels);
  const double spec_scale = 1.0 / static_cast<double>(w * w);
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    for (std::size_t i = 0; i < 2 * config.n_modes * w * w; ++i) v[lay.spec[l] + i] = spec_scale * rng.uniform();
    affine(lay.local_w[l], lay.local_b[l], w, w);
  }
  affine(lay.proj1_w, lay.proj1_b, config.proj_hidden, w);
  affine(lay.proj2_w, lay.proj2_b, config.out_channels, config.proj_hidden);
  return params;
}

}  // namespace seisop::neuralop
