#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seisop/config.hpp"
#include "seisop/simplify.hpp"
#include "seisop/trajectory.hpp"

namespace seisop {

/// One excitation record with its responses. `index` is the record's position
/// in the generated sequence; its excitation seed is record_seed(master, index).
struct Record {
  std::uint64_t index = 0;
  Trajectory a_g;
  std::optional<Trajectory> z;  ///< intermediate trajectory
  std::optional<Trajectory> u;  ///< full nonlinear response

  friend bool operator==(const Record&, const Record&) = default;
};

struct PairedDataset {
  TimeGrid grid{0.01, 2};
  std::size_t n_dof = 0;
  simplify::SimplifierKind simplifier;
  std::uint64_t master_seed = 0;
  std::uint64_t model_hash = 0;
  std::vector<Record> records;

  std::size_t size() const noexcept { return records.size(); }
  bool has_z() const noexcept { return !records.empty() && records.front().z.has_value(); }
  bool has_u() const noexcept { return !records.empty() && records.front().u.has_value(); }
  /// Shared grid, n_dof and channel presence across records.
  void validate() const;
  /// Hash of every stored array, in record order.
  std::uint64_t content_hash() const;

  friend bool operator==(const PairedDataset&, const PairedDataset&) = default;
};

std::uint64_t record_seed(std::uint64_t master_seed, std::uint64_t index);

/// Ground motions only (records first_index .. first_index + count - 1).
PairedDataset synthesize_motions(const ExperimentConfig& config, std::size_t count, std::uint64_t master_seed,
                                 std::uint64_t first_index = 0);

/// Adds u (full simulation) and z (`simplifier`, unless None) to every record.
/// Integration failures are rethrown with the record index.
PairedDataset complete_dataset(const ExperimentConfig& config, PairedDataset motions,
                               const simplify::SimplifierKind& simplifier);

/// synthesize_motions followed by complete_dataset.
PairedDataset generate_dataset(const ExperimentConfig& config, const simplify::SimplifierKind& simplifier,
                               std::size_t count, std::uint64_t master_seed);

/// Deterministic shuffle, then the first n_train, next n_val, next n_test.
std::array<PairedDataset, 3> split(const PairedDataset& data, std::size_t n_train, std::size_t n_val,
                                   std::size_t n_test, std::uint64_t seed);

/// First `count` records.
PairedDataset head(const PairedDataset& data, std::size_t count);

/// SRD1 container:
///   "SRD1", u32 version = 1, f64 dt, u32 n_t, u32 n_d, u32 N,
///   u32 simplifier kind, u32 simplifier parameter, u32 flags (1 = z, 2 = u),
///   u64 master seed, u64 model hash,
///   then per record: u64 index, a_g[n_t], z[n_d][n_t] if flagged, u[n_d][n_t] if flagged.
/// All little-endian.
std::string encode_srd1(const PairedDataset& data);
PairedDataset decode_srd1(std::string_view bytes);
void save_dataset(const std::string& path, const PairedDataset& data);
PairedDataset load_dataset(const std::string& path);

/// t, a_g, z_1..z_n, u_1..u_n columns for one record.
std::string record_csv(const PairedDataset& data, std::size_t record);

}  // namespace seisop
