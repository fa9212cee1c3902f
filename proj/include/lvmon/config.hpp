#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvmon/blind.hpp"
#include "lvmon/constellation.hpp"
#include "lvmon/demapper.hpp"

namespace lvmon {

/// FEC-threshold ASI presets.
inline constexpr double kFt1 = 0.93;
inline constexpr double kFt2 = 0.86;
inline constexpr double kFt3 = 0.78;

/// Accepts "FT#1".."FT#3" (also "ft1", "1") and returns the ASI threshold.
double fec_threshold_preset(std::string_view name);

/// Format names: qpsk, 16qam, 64qam, 256qam, ps-16qam, ps-64qam, ps-256qam.
/// PS formats need an entropy in bpcu.
Constellation make_constellation(const std::string& format, std::optional<double> entropy_bpcu);

enum class AuxMode { AsiTarget, FixedSnr, Matched };

struct SweepConfig {
  std::string format = "ps-64qam";
  std::optional<double> entropy_bpcu = 4.1;
  std::vector<double> snr_db;

  AuxMode aux_mode = AuxMode::AsiTarget;
  double aux_asi_target = kFt2;
  double aux_snr_db = 10.0;

  std::vector<int> n_bin = {32};
  std::optional<double> delta_l;  // when set, overrides l_max
  double l_max = LQuantizer::kDefaultLMax;
  int y_quant_levels = 1024;

  std::size_t samples = 1'000'000;  // L-values per point
  std::size_t calibration_samples = 1'000'000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: LVMON_THREADS, else hardware concurrency

  bool compute_gmi = true;
  bool noiseless = false;
  bool per_tributary = false;
  BlindOptions blind;

  std::string csv_path;
  std::string json_path;

  LQuantizer quantizer(int n_bin) const;
  Constellation constellation() const { return make_constellation(format, entropy_bpcu); }

  /// Throws ConfigError when a field is out of range or the grids are empty.
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
SweepConfig config_from_json(const nlohmann::json& j);
SweepConfig load_config(const std::filesystem::path& path);

/// Canonical form of every field that influences results (output paths and
/// thread count are left out).
nlohmann::json canonical_json(const SweepConfig& cfg);
/// 16 hex digits, FNV-1a of the compact canonical JSON.
std::string config_hash(const SweepConfig& cfg);

/// Worker count: requested if positive, else LVMON_THREADS, else hardware concurrency.
int resolve_threads(int requested);

}  // namespace lvmon
