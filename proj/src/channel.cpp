#include "lvmon/channel.hpp"

#include <cmath>
#include <string>

#include "lvmon/errors.hpp"
#include "lvmon/metrics.hpp"

namespace lvmon {

double ChannelConfig::noise_variance() const { return noiseless ? 0.0 : std::pow(10.0, -snr_db / 10.0); }

std::vector<cdouble> transmit(std::span<const cdouble> x, const ChannelConfig& cfg, Rng& rng) {
  std::vector<cdouble> y(x.begin(), x.end());
  if (cfg.noiseless) return y;
  if (!std::isfinite(cfg.snr_db)) throw ConfigError("snr_db must be finite (use the noiseless flag)");
  std::normal_distribution<double> gauss(0.0, std::sqrt(cfg.noise_variance() / 2.0));
  for (auto& v : y) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += cdouble(re, im);
  }
  return y;
}

std::vector<cdouble> transmit(std::span<const cdouble> x, const ChannelConfig& cfg) {
  Rng rng(cfg.seed);
  return transmit(x, cfg, rng);
}

namespace {

// Symbols and unit-variance noise drawn once, so every probe sees the same
// realization scaled to its SNR.
struct ProbeSet {
  SymbolBatch tx;
  std::vector<cdouble> unit_noise;
};

ProbeSet make_probe_set(const Constellation& c, const CalibrationOptions& opts) {
  const auto m = static_cast<std::size_t>(c.bits_per_symbol());
  const std::size_t n_sym = (opts.samples + m - 1) / m;
  Rng rng(opts.seed);
  ProbeSet ps{sample_symbols(c, n_sym, rng), {}};
  ps.unit_noise = transmit(std::vector<cdouble>(n_sym), ChannelConfig{0.0, 0, false}, rng);
  return ps;
}

double probe_asi(const Constellation& c, const ProbeSet& ps, double snr_db, const LQuantizer& quantizer,
                 int y_quant_levels) {
  const double scale = std::sqrt(std::pow(10.0, -snr_db / 10.0));
  std::vector<cdouble> y(ps.tx.symbols.size());
  for (std::size_t n = 0; n < y.size(); ++n) y[n] = ps.tx.symbols[n] + scale * ps.unit_noise[n];
  const Demapper demapper(c, DemapperConfig{snr_db, y_quant_levels, quantizer});
  return asi(symmetrize(demapper.demap(y), ps.tx.bits));
}

}  // namespace

double matched_asi(const Constellation& c, double snr_db, const LQuantizer& quantizer,
                   const CalibrationOptions& opts) {
  return probe_asi(c, make_probe_set(c, opts), snr_db, quantizer, opts.y_quant_levels);
}

Calibration calibrate_aux_snr(const Constellation& c, double target_asi, const LQuantizer& quantizer,
                              const CalibrationOptions& opts) {
  if (!(target_asi > 0.0 && target_asi < 1.0)) {
    throw ConfigError("ASI target must lie in (0, 1), got " + std::to_string(target_asi));
  }
  const ProbeSet ps = make_probe_set(c, opts);
  auto asi_at = [&](double snr) { return probe_asi(c, ps, snr, quantizer, opts.y_quant_levels); };

  double lo = opts.snr_lo_db;
  double hi = opts.snr_hi_db;
  const double asi_lo = asi_at(lo);
  const double asi_hi = asi_at(hi);
  int probes = 2;
  if (!(asi_lo < target_asi && asi_hi > target_asi)) {
    throw ConfigError("ASI target " + std::to_string(target_asi) + " not bracketed by SNR [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "] dB");
  }
  Calibration best{hi, asi_hi, probes};
  for (int it = 0; it < 60 && hi - lo > 1e-4; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double a = asi_at(mid);
    ++probes;
    if (std::abs(a - target_asi) < std::abs(best.asi - target_asi)) best = {mid, a, probes};
    if (a < target_asi) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  best.probes = probes;
  if (std::abs(best.asi - target_asi) > opts.tolerance) {
    throw NumericError("calibration could not reach ASI target within tolerance");
  }
  return best;
}

}  // namespace lvmon
