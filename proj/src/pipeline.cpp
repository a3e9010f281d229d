#include "seisop/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "seisop/binio.hpp"
#include "seisop/error.hpp"

namespace seisop {

namespace {

constexpr std::uint32_t kFnoVersion = 1;
constexpr std::size_t kEvalChunk = 20;

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void check_training_set(const PairedDataset& d, Mode mode, const char* what) {
  d.validate();
  if (d.size() == 0) return;
  if (!d.has_u()) throw InvalidArgument(std::string(what) + ": records need u");
  if (mode == Mode::Composite && !d.has_z()) {
    throw InvalidArgument(std::string(what) + ": composite mode needs z (dataset built without a simplifier)");
  }
}

std::vector<const Record*> pointers(const PairedDataset& d) {
  std::vector<const Record*> out;
  out.reserve(d.size());
  for (const Record& r : d.records) out.push_back(&r);
  return out;
}

// Network output (normalized) to displacements, in place.
void denormalize_output(const Normalization& norm, neuralop::BatchTensor& t) {
  for (std::size_t b = 0; b < t.batch; ++b) {
    for (std::size_t c = 0; c < t.channels; ++c) norm.output.denormalize(t.row(b, c), c);
  }
}

neuralop::BatchTensor targets_of(std::span<const Record* const> recs, std::size_t n_dof, std::size_t n_t) {
  neuralop::BatchTensor t(recs.size(), n_dof, n_t);
  for (std::size_t b = 0; b < recs.size(); ++b) {
    const auto v = recs[b]->u->values();
    std::copy(v.begin(), v.end(), t.data.begin() + static_cast<std::ptrdiff_t>(b * n_dof * n_t));
  }
  return t;
}

std::vector<Trajectory> forward_records(const Checkpoint& ckpt, std::span<const Record* const> recs) {
  std::vector<Trajectory> out;
  out.reserve(recs.size());
  for (std::size_t at = 0; at < recs.size(); at += kEvalChunk) {
    const auto chunk = recs.subspan(at, std::min(kEvalChunk, recs.size() - at));
    auto y = neuralop::fno_forward(ckpt.params, assemble_inputs(ckpt.mode, ckpt.norm, chunk));
    denormalize_output(ckpt.norm, y);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      const TimeGrid& g = chunk[b]->a_g.grid();
      const auto first = y.data.begin() + static_cast<std::ptrdiff_t>(b * y.channels * y.time);
      out.emplace_back(g, y.channels, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(y.channels * y.time)));
    }
  }
  return out;
}

}  // namespace

std::string to_string(Mode m) { return m == Mode::Baseline ? "baseline" : "composite"; }

Mode parse_mode(std::string_view text) {
  if (text == "baseline") return Mode::Baseline;
  if (text == "composite") return Mode::Composite;
  throw InvalidArgument("mode: expected 'baseline' or 'composite', got '" + std::string(text) + "'");
}

ChannelStats ChannelStats::fit(std::span<const Trajectory* const> data) {
  if (data.empty()) throw InvalidArgument("ChannelStats::fit: no records");
  const std::size_t nc = data[0]->channels();
  ChannelStats s;
  s.mean.assign(nc, 0.0);
  s.std.assign(nc, 0.0);
  double count = 0.0;
  for (const Trajectory* t : data) {
    for (std::size_t c = 0; c < nc; ++c) {
      for (double v : t->channel(c)) s.mean[c] += v;
    }
    count += static_cast<double>(t->steps());
  }
  for (double& m : s.mean) m /= count;
  for (const Trajectory* t : data) {
    for (std::size_t c = 0; c < nc; ++c) {
      for (double v : t->channel(c)) s.std[c] += (v - s.mean[c]) * (v - s.mean[c]);
    }
  }
  for (double& v : s.std) {
    v = std::sqrt(v / count);
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

void ChannelStats::normalize(std::span<double> values, std::size_t c) const {
  const double inv = 1.0 / std[c];
  for (double& v : values) v = (v - mean[c]) * inv;
}

void ChannelStats::denormalize(std::span<double> values, std::size_t c) const {
  for (double& v : values) v = v * std[c] + mean[c];
}

const Trajectory& input_function(const Record& r, Mode mode) {
  if (mode == Mode::Baseline) return r.a_g;
  if (!r.z) throw InvalidArgument("composite input needs z for record " + std::to_string(r.index));
  return *r.z;
}

Normalization Normalization::fit(const PairedDataset& train, Mode mode) {
  std::vector<const Trajectory*> in, out;
  for (const Record& r : train.records) {
    in.push_back(&input_function(r, mode));
    if (!r.u) throw InvalidArgument("Normalization::fit: records need u");
    out.push_back(&*r.u);
  }
  return {ChannelStats::fit(in), ChannelStats::fit(out)};
}

neuralop::BatchTensor assemble_inputs(Mode mode, const Normalization& norm, std::span<const Record* const> records) {
  if (records.empty()) throw InvalidArgument("assemble_inputs: no records");
  const std::size_t nf = norm.input.mean.size();
  const std::size_t n = records[0]->a_g.steps();
  neuralop::BatchTensor x(records.size(), nf + 1, n);
  for (std::size_t b = 0; b < records.size(); ++b) {
    const Trajectory& f = input_function(*records[b], mode);
    if (f.channels() != nf || f.steps() != n) {
      throw InvalidArgument("assemble_inputs: record " + std::to_string(b) + " does not match the normalization");
    }
    for (std::size_t c = 0; c < nf; ++c) {
      auto row = x.row(b, c);
      const auto src = f.channel(c);
      std::copy(src.begin(), src.end(), row.begin());
      norm.input.normalize(row, c);
    }
    auto t = x.row(b, nf);
    for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return x;
}

simplify::SimplifierKind Checkpoint::simplifier() const {
  if (!metadata.contains("simplifier")) throw InvalidArgument("checkpoint: missing simplifier metadata");
  return simplify::SimplifierKind::parse(metadata.at("simplifier").get<std::string>());
}

TimeGrid Checkpoint::grid() const {
  if (!metadata.contains("grid")) throw InvalidArgument("checkpoint: missing grid metadata");
  const auto& g = metadata.at("grid");
  return TimeGrid(g.at("dt").get<double>(), g.at("steps").get<std::size_t>());
}

std::optional<refine::RefinementModel> Checkpoint::refinement() const {
  if (!metadata.contains("refinement")) return std::nullopt;
  return refine::from_json(metadata.at("refinement").dump());
}

void Checkpoint::set_refinement(const refine::RefinementModel& model) {
  metadata["refinement"] = nlohmann::ordered_json::parse(refine::to_json(model));
}

std::optional<ExperimentConfig> Checkpoint::config() const {
  if (!metadata.contains("config")) return std::nullopt;
  return parse_config(metadata.at("config").dump());
}

void Checkpoint::set_config(const ExperimentConfig& config) {
  metadata["config"] = nlohmann::ordered_json::parse(config_to_json(config, -1));
}

Checkpoint train(const PairedDataset& train_set, const PairedDataset& validation, const NetworkConfig& network,
                 const TrainingConfig& training, std::uint64_t seed, Mode mode, const EpochCallback& on_epoch) {
  if (train_set.size() == 0) throw InvalidArgument("train: empty training set");
  check_training_set(train_set, mode, "train: training set");
  check_training_set(validation, mode, "train: validation set");
  if (validation.size() && (!(validation.grid == train_set.grid) || validation.n_dof != train_set.n_dof)) {
    throw InvalidArgument("train: validation set grid or n_dof differs from the training set");
  }
  if (training.batch < 1 || training.epochs < 1) throw InvalidArgument("train: batch and epochs must be >= 1");
  const std::size_t n = train_set.grid.size(), nd = train_set.n_dof;
  const std::size_t in_ch = (mode == Mode::Baseline ? 1 : nd) + 1;
  const neuralop::FnoConfig fno = network.fno(in_ch, nd);
  fno.validate();
  if (fno.n_modes > fno.padded_length(n) / 2 + 1) {
    throw InvalidArgument("train: K = " + std::to_string(fno.n_modes) + " exceeds floor(n_t/2)+1");
  }

  Checkpoint ckpt;
  ckpt.mode = mode;
  ckpt.seed = seed;
  ckpt.norm = Normalization::fit(train_set, mode);
  RngStream root(seed);
  RngStream init_rng = root.split("init");
  RngStream batch_rng = root.split("batching");
  neuralop::FnoParams params = neuralop::init_params(fno, init_rng);
  ckpt.params = params;
  neuralop::FnoParams best_params = params;

  const auto train_recs = pointers(train_set);
  const std::vector<double>& out_std = ckpt.norm.output.std;
  neuralop::AdamState adam;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(train_recs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<const Record*> batch;

  for (std::size_t epoch = 0; epoch < training.epochs; ++epoch) {
    const double lr = training.rate_at(epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[batch_rng.index(i)]);
    double num = 0.0, den = 0.0;
    for (std::size_t at = 0; at < order.size(); at += training.batch) {
      batch.clear();
      for (std::size_t i = at; i < std::min(order.size(), at + training.batch); ++i) batch.push_back(train_recs[order[i]]);
      neuralop::FnoTape tape;
      auto y = neuralop::fno_forward(params, assemble_inputs(mode, ckpt.norm, batch), &tape);
      denormalize_output(ckpt.norm, y);
      auto loss = neuralop::relative_l2_loss(y, targets_of(batch, nd, n));
      for (std::size_t b = 0; b < loss.grad.batch; ++b) {
        for (std::size_t c = 0; c < nd; ++c) {
          for (double& g : loss.grad.row(b, c)) g *= out_std[c];
        }
      }
      const auto grads = neuralop::fno_backward(params, tape, loss.grad);
      neuralop::adam_step(params, grads, adam, lr);
      num += loss.numerator;
      den += loss.denominator;
    }
    EpochLoss el;
    el.train = num / den;
    if (validation.size()) {
      ckpt.params = params;
      el.validation = dataset_loss(ckpt, validation);
    } else {
      el.validation = el.train;
    }
    if (!std::isfinite(el.train) || !std::isfinite(el.validation)) {
      throw NumericError("train: loss is not finite at epoch " + std::to_string(epoch));
    }
    ckpt.history.push_back(el);
    if (el.validation < best) {
      best = el.validation;
      ckpt.best_epoch = static_cast<std::uint32_t>(epoch);
      best_params = params;
    }
    if (on_epoch) on_epoch(epoch, el);
  }
  ckpt.params = std::move(best_params);
  ckpt.metadata["mode"] = to_string(mode);
  ckpt.metadata["simplifier"] =
      mode == Mode::Composite ? train_set.simplifier.to_string() : simplify::SimplifierKind::none().to_string();
  ckpt.metadata["grid"] = {{"dt", train_set.grid.dt()}, {"steps", train_set.grid.size()}};
  ckpt.metadata["n_dof"] = nd;
  ckpt.metadata["train"] = {{"records", train_set.size()},
                            {"content_hash", hex(train_set.content_hash())},
                            {"model_hash", hex(train_set.model_hash)},
                            {"master_seed", train_set.master_seed}};
  ckpt.metadata["validation_records"] = validation.size();
  return ckpt;
}

double dataset_loss(const Checkpoint& ckpt, const PairedDataset& data) {
  const auto recs = pointers(data);
  const auto preds = forward_records(ckpt, recs);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < recs.size(); ++j) {
    if (!recs[j]->u) throw InvalidArgument("dataset_loss: records need u");
    for (std::size_t c = 0; c < preds[j].channels(); ++c) {
      const auto p = preds[j].channel(c);
      const auto t = recs[j]->u->channel(c);
      double e2 = 0.0, t2 = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        e2 += (p[k] - t[k]) * (p[k] - t[k]);
        t2 += t[k] * t[k];
      }
      num += std::sqrt(e2);
      den += std::sqrt(t2);
    }
  }
  return num / den;
}

Trajectory predict(const Checkpoint& ckpt, const Trajectory& a_g, const Trajectory* z) {
  if (a_g.channels() != 1) throw InvalidArgument("predict: a_g must have one channel");
  Record r{0, a_g, std::nullopt, std::nullopt};
  if (ckpt.mode == Mode::Composite) {
    if (z) {
      if (z->channels() != ckpt.n_dof()) {
        throw InvalidArgument("predict: z has " + std::to_string(z->channels()) + " channels, checkpoint expects " +
                              std::to_string(ckpt.n_dof()));
      }
      r.z = *z;
    } else {
      const auto cfg = ckpt.config();
      if (!cfg) throw InvalidArgument("predict: checkpoint has no model configuration to compute z");
      if (cfg->model.n_dof() != ckpt.n_dof()) throw InvalidArgument("predict: n_dof mismatch with checkpoint");
      r.z = simplify::apply(ckpt.simplifier(), cfg->model, a_g, cfg->substeps);
    }
  }
  const Record* p = &r;
  return forward_records(ckpt, std::span<const Record* const>(&p, 1)).front();
}

std::vector<Trajectory> predict_dataset(const Checkpoint& ckpt, const PairedDataset& data) {
  if (data.size() == 0) return {};
  if (data.n_dof != ckpt.n_dof()) throw InvalidArgument("predict: dataset n_dof differs from the checkpoint");
  if (ckpt.mode == Mode::Composite && !data.has_z()) {
    std::vector<Trajectory> out;
    for (const Record& r : data.records) out.push_back(predict(ckpt, r.a_g));
    return out;
  }
  if (ckpt.mode == Mode::Composite && !(data.simplifier == ckpt.simplifier())) {
    throw InvalidArgument("predict: dataset simplifier " + data.simplifier.to_string() +
                          " differs from checkpoint simplifier " + ckpt.simplifier().to_string());
  }
  return forward_records(ckpt, pointers(data));
}

std::string encode_fno1(const Checkpoint& ckpt) {
  const auto& c = ckpt.params.config();
  binio::Writer w;
  w.bytes("FNO1");
  w.u32(kFnoVersion);
  for (std::size_t v : {c.in_channels, c.out_channels, c.width, c.n_layers, c.n_modes, c.proj_hidden}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.u32(static_cast<std::uint32_t>(c.activation));
  w.f64(c.pad_fraction);
  w.u32(static_cast<std::uint32_t>(ckpt.mode));
  for (const ChannelStats* s : {&ckpt.norm.input, &ckpt.norm.output}) {
    w.u32(static_cast<std::uint32_t>(s->mean.size()));
    w.f64s(s->mean);
    w.f64s(s->std);
  }
  w.u64(ckpt.params.size());
  w.f64s(ckpt.params.values());
  w.u32(static_cast<std::uint32_t>(ckpt.history.size()));
  for (const EpochLoss& e : ckpt.history) {
    w.f64(e.train);
    w.f64(e.validation);
  }
  w.u32(ckpt.best_epoch);
  w.u64(ckpt.seed);
  const std::string meta = ckpt.metadata.dump();
  w.u32(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta);
  return w.take();
}

Checkpoint decode_fno1(std::string_view bytes) {
  binio::Reader in(bytes, "FNO1");
  if (in.bytes(4) != "FNO1") in.fail("bad magic");
  if (const auto v = in.u32(); v != kFnoVersion) in.fail("unsupported version " + std::to_string(v));
  neuralop::FnoConfig c;
  c.in_channels = in.u32();
  c.out_channels = in.u32();
  c.width = in.u32();
  c.n_layers = in.u32();
  c.n_modes = in.u32();
  c.proj_hidden = in.u32();
  const std::uint32_t act = in.u32();
  if (act != 0) in.fail("unknown activation id " + std::to_string(act));
  c.pad_fraction = in.f64();
  Checkpoint ckpt;
  const std::uint32_t mode = in.u32();
  if (mode > 1) in.fail("unknown mode " + std::to_string(mode));
  ckpt.mode = static_cast<Mode>(mode);
  for (ChannelStats* s : {&ckpt.norm.input, &ckpt.norm.output}) {
    const std::uint32_t n = in.u32();
    if (n > 4096) in.fail("implausible channel count");
    s->mean.resize(n);
    s->std.resize(n);
    in.f64s(s->mean);
    in.f64s(s->std);
  }
  const std::uint64_t count = in.u64();
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    in.fail(e.what());
  }
  if (count != c.parameter_count()) in.fail("parameter count does not match the configuration");
  if (ckpt.norm.input.mean.size() + 1 != c.in_channels || ckpt.norm.output.mean.size() != c.out_channels) {
    in.fail("normalization does not match the configuration");
  }
  std::vector<double> values(count);
  in.f64s(values);
  ckpt.params = neuralop::FnoParams(c, std::move(values));
  const std::uint32_t epochs = in.u32();
  if (in.remaining() < 16ull * epochs) in.fail("truncated history");
  ckpt.history.resize(epochs);
  for (EpochLoss& e : ckpt.history) {
    e.train = in.f64();
    e.validation = in.f64();
  }
  ckpt.best_epoch = in.u32();
  ckpt.seed = in.u64();
  const std::uint32_t len = in.u32();
  const std::string_view meta = in.bytes(len);
  if (!in.at_end()) in.fail("trailing bytes");
  try {
    ckpt.metadata = nlohmann::ordered_json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    in.fail(std::string("metadata: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  binio::write_file_atomic(path, encode_fno1(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return decode_fno1(binio::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace seisop
