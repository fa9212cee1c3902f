#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lvmon/constellation.hpp"
#include "lvmon/demapper.hpp"
#include "lvmon/rng.hpp"

namespace lvmon {

/// Complex AWGN at SNR = Es/N0 per complex symbol, with unit signal energy:
/// total noise variance 10^(-snr_db/10), half of it per real dimension.
struct ChannelConfig {
  double snr_db = 10.0;
  std::uint64_t seed = 1;
  bool noiseless = false;

  double noise_variance() const;
};

std::vector<cdouble> transmit(std::span<const cdouble> x, const ChannelConfig& cfg, Rng& rng);
std::vector<cdouble> transmit(std::span<const cdouble> x, const ChannelConfig& cfg);

struct CalibrationOptions {
  std::size_t samples = 1'000'000;  // L-values per probe
  std::uint64_t seed = 0x5eed'ca11;
  double snr_lo_db = -10.0;
  double snr_hi_db = 40.0;
  double tolerance = 0.002;  // allowed |ASI - target| at the returned SNR
  int y_quant_levels = 1024;
};

struct Calibration {
  double snr_db;
  double asi;  // matched-decoding ASI measured at snr_db
  int probes;
};

/// Matched-decoding ASI of constellation c at the given SNR (Monte-Carlo).
double matched_asi(const Constellation& c, double snr_db, const LQuantizer& quantizer,
                   const CalibrationOptions& opts = {});

/// SNR at which matched decoding yields the target ASI, by bisection over SNR
/// with common random numbers across probes. Throws ConfigError if the
/// target is outside (0, 1) or not bracketed by [snr_lo_db, snr_hi_db].
Calibration calibrate_aux_snr(const Constellation& c, double target_asi, const LQuantizer& quantizer,
                              const CalibrationOptions& opts = {});

}  // namespace lvmon
