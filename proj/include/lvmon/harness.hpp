#pragma once

#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvmon/blind.hpp"
#include "lvmon/channel.hpp"
#include "lvmon/config.hpp"
#include "lvmon/metrics.hpp"

namespace lvmon {

/// Bumped whenever CSV/JSON columns change.
inline constexpr int kResultSchemaVersion = 1;

struct PointResult {
  int n_bin = 0;
  double delta_l = 0.0;
  double l_max = 0.0;
  double snr_db = 0.0;
  double aux_snr_db = 0.0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  BlindEstimate blind;
  double asi_err = 0.0;   // asi_hat - asi
  double q_err_db = 0.0;  // q_hat_db - q_ber_db, NaN when either is unavailable
};

/// Calibrated auxiliary SNRs keyed by (format, entropy, target, quantizer,
/// y grid, sample count). Concurrent requests for the same key wait for a
/// single calibration run.
class CalibrationCache {
 public:
  Calibration get(const SweepConfig& cfg, const Constellation& c, const LQuantizer& q);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_future<Calibration>> entries_;
};

/// Auxiliary-channel SNR of a point according to cfg.aux_mode.
double resolve_aux_snr(const SweepConfig& cfg, const Constellation& c, const LQuantizer& q, double snr_db,
                       CalibrationCache& cache);

/// Seed of the point at snr_db; shared by every n_bin so quantizer settings
/// are compared on identical channel realizations.
std::uint64_t point_seed(std::uint64_t master, double snr_db);

struct PointOutput {
  PointResult row;
  std::optional<LHistogram> histogram;  // pooled |L| histogram of the point
};

/// One simulated point: transmit, demap, measure with known bits, estimate blind.
PointOutput run_point(const SweepConfig& cfg, const Constellation& c, const LQuantizer& q, double aux_snr_db,
                      double snr_db, const BlindEstimator& estimator);
PointOutput run_point(const SweepConfig& cfg, int n_bin, double snr_db, CalibrationCache& cache);

/// Every (n_bin, snr) point of cfg, ordered as listed in the config. Runs on
/// resolve_threads(cfg.threads) workers; output does not depend on the count.
std::vector<PointResult> run_sweep(const SweepConfig& cfg, CalibrationCache* cache = nullptr);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<PointResult>& rows);
std::string csv_row(const SweepConfig& cfg, const std::string& hash, const PointResult& r);
nlohmann::json results_json(const SweepConfig& cfg, const std::vector<PointResult>& rows);

}  // namespace lvmon
