#include "seisop/dataset.hpp"

#include <cstdio>

#include "seisop/binio.hpp"
#include "seisop/dynamics.hpp"
#include "seisop/error.hpp"
#include "seisop/excitation.hpp"
#include "seisop/rng.hpp"

namespace seisop {

namespace {

constexpr std::uint32_t kSrdVersion = 1;

std::uint64_t hash_values(const Trajectory& t, std::uint64_t h) {
  return fnv1a(t.values().data(), t.values().size() * sizeof(double), h);
}

}  // namespace

void PairedDataset::validate() const {
  const bool z = has_z(), u = has_u();
  for (std::size_t j = 0; j < records.size(); ++j) {
    const Record& r = records[j];
    auto bad = [&](const std::string& what) {
      throw InvalidArgument("dataset record " + std::to_string(j) + ": " + what);
    };
    if (r.a_g.channels() != 1 || !(r.a_g.grid() == grid)) bad("a_g must be one channel on the dataset grid");
    if (r.z.has_value() != z || r.u.has_value() != u) bad("inconsistent channel presence");
    if (r.z && (r.z->channels() != n_dof || !(r.z->grid() == grid))) bad("z shape mismatch");
    if (r.u && (r.u->channels() != n_dof || !(r.u->grid() == grid))) bad("u shape mismatch");
  }
}

std::uint64_t PairedDataset::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Record& r : records) {
    h = fnv1a(&r.index, sizeof r.index, h);
    h = hash_values(r.a_g, h);
    if (r.z) h = hash_values(*r.z, h);
    if (r.u) h = hash_values(*r.u, h);
  }
  return h;
}

std::uint64_t record_seed(std::uint64_t master_seed, std::uint64_t index) {
  return derive_seed(master_seed, "excitation", index);
}

PairedDataset synthesize_motions(const ExperimentConfig& config, std::size_t count, std::uint64_t master_seed,
                                 std::uint64_t first_index) {
  config.excitation.validate();
  PairedDataset d;
  d.grid = config.excitation.grid;
  d.n_dof = config.model.n_dof();
  d.simplifier = simplify::SimplifierKind::none();
  d.master_seed = master_seed;
  d.model_hash = physics_hash(config);
  d.records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t index = first_index + i;
    RngStream rng(record_seed(master_seed, index));
    d.records.push_back(Record{index, excitation::synthesize(config.excitation, rng), std::nullopt, std::nullopt});
  }
  return d;
}

PairedDataset complete_dataset(const ExperimentConfig& config, PairedDataset data,
                               const simplify::SimplifierKind& simplifier) {
  config.model.validate();
  simplifier.validate(config.model.n_dof());
  data.n_dof = config.model.n_dof();
  data.simplifier = simplifier;
  data.model_hash = physics_hash(config);
  for (std::size_t j = 0; j < data.records.size(); ++j) {
    Record& r = data.records[j];
    try {
      r.u = dynamics::simulate_nonlinear(config.model, r.a_g, config.substeps);
      if (simplifier.kind != simplify::Kind::None) {
        r.z = simplify::apply(simplifier, config.model, r.a_g, config.substeps);
      } else {
        r.z.reset();
      }
    } catch (const std::exception& e) {
      throw NumericError("record " + std::to_string(j) + " (index " + std::to_string(r.index) + "): " + e.what());
    }
  }
  return data;
}

PairedDataset generate_dataset(const ExperimentConfig& config, const simplify::SimplifierKind& simplifier,
                               std::size_t count, std::uint64_t master_seed) {
  if (count < 1) throw InvalidArgument("generate_dataset: N must be >= 1");
  return complete_dataset(config, synthesize_motions(config, count, master_seed), simplifier);
}

std::array<PairedDataset, 3> split(const PairedDataset& data, std::size_t n_train, std::size_t n_val,
                                   std::size_t n_test, std::uint64_t seed) {
  const std::size_t need = n_train + n_val + n_test;
  if (need > data.size()) {
    throw InvalidArgument("split: " + std::to_string(need) + " records requested, dataset has " +
                          std::to_string(data.size()));
  }
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RngStream rng = RngStream(seed).split("split");
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::array<PairedDataset, 3> out;
  const std::size_t counts[3] = {n_train, n_val, n_test};
  std::size_t at = 0;
  for (int s = 0; s < 3; ++s) {
    out[s] = data;
    out[s].records.clear();
    for (std::size_t i = 0; i < counts[s]; ++i) out[s].records.push_back(data.records[order[at++]]);
  }
  return out;
}

PairedDataset head(const PairedDataset& data, std::size_t count) {
  if (count > data.size()) throw InvalidArgument("head: dataset has only " + std::to_string(data.size()) + " records");
  PairedDataset out = data;
  out.records.assign(data.records.begin(), data.records.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

std::string encode_srd1(const PairedDataset& d) {
  d.validate();
  binio::Writer w;
  w.bytes("SRD1");
  w.u32(kSrdVersion);
  w.f64(d.grid.dt());
  w.u32(static_cast<std::uint32_t>(d.grid.size()));
  w.u32(static_cast<std::uint32_t>(d.n_dof));
  w.u32(static_cast<std::uint32_t>(d.size()));
  w.u32(static_cast<std::uint32_t>(d.simplifier.kind));
  w.u32(static_cast<std::uint32_t>(d.simplifier.param));
  w.u32((d.has_z() ? 1u : 0u) | (d.has_u() ? 2u : 0u));
  w.u64(d.master_seed);
  w.u64(d.model_hash);
  for (const Record& r : d.records) {
    w.u64(r.index);
    w.f64s(r.a_g.values());
    if (r.z) w.f64s(r.z->values());
    if (r.u) w.f64s(r.u->values());
  }
  return w.take();
}

PairedDataset decode_srd1(std::string_view bytes) {
  binio::Reader in(bytes, "SRD1");
  if (in.bytes(4) != "SRD1") in.fail("bad magic");
  if (const auto v = in.u32(); v != kSrdVersion) in.fail("unsupported version " + std::to_string(v));
  PairedDataset d;
  const double dt = in.f64();
  const std::uint32_t n_t = in.u32();
  try {
    d.grid = TimeGrid(dt, n_t);
  } catch (const InvalidArgument& e) {
    in.fail(std::string("bad grid: ") + e.what());
  }
  d.n_dof = in.u32();
  const std::uint32_t n = in.u32();
  const std::uint32_t kind = in.u32();
  if (kind > 3) in.fail("unknown simplifier kind " + std::to_string(kind));
  d.simplifier = {static_cast<simplify::Kind>(kind), in.u32()};
  const std::uint32_t flags = in.u32();
  if (flags > 3) in.fail("unknown flags");
  d.master_seed = in.u64();
  d.model_hash = in.u64();
  const std::size_t per = 8 + 8 * static_cast<std::size_t>(n_t) *
                                  (1 + ((flags & 1) ? d.n_dof : 0) + ((flags & 2) ? d.n_dof : 0));
  if (in.remaining() != per * n) in.fail("size does not match header");
  d.records.reserve(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    Record r{in.u64(), Trajectory(d.grid, 1), std::nullopt, std::nullopt};
    in.f64s(r.a_g.values());
    if (flags & 1) {
      r.z.emplace(d.grid, d.n_dof);
      in.f64s(r.z->values());
    }
    if (flags & 2) {
      r.u.emplace(d.grid, d.n_dof);
      in.f64s(r.u->values());
    }
    d.records.push_back(std::move(r));
  }
  return d;
}

void save_dataset(const std::string& path, const PairedDataset& data) {
  binio::write_file_atomic(path, encode_srd1(data));
}

PairedDataset load_dataset(const std::string& path) {
  try {
    return decode_srd1(binio::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string record_csv(const PairedDataset& d, std::size_t j) {
  if (j >= d.size()) throw InvalidArgument("record_csv: record " + std::to_string(j) + " out of range");
  const Record& r = d.records[j];
  std::string out = "t,a_g";
  for (std::size_t i = 0; r.z && i < d.n_dof; ++i) out += ",z_" + std::to_string(i + 1);
  for (std::size_t i = 0; r.u && i < d.n_dof; ++i) out += ",u_" + std::to_string(i + 1);
  out += "\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out += buf;
  };
  for (std::size_t k = 0; k < d.grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.10g", d.grid.time(k));
    out += buf;
    put(r.a_g(0, k));
    for (std::size_t i = 0; r.z && i < d.n_dof; ++i) put((*r.z)(i, k));
    for (std::size_t i = 0; r.u && i < d.n_dof; ++i) put((*r.u)(i, k));
    out += "\n";
  }
  return out;
}

}  // namespace seisop
