#include "lvmon/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "lvmon/errors.hpp"

namespace lvmon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void rethrow_with_context(const std::string& ctx) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(ctx + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(ctx + ": " + e.what());
  } catch (const UsageError& e) {
    throw UsageError(ctx + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ctx + ": " + e.what());
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt("%.10g", v);
}

nlohmann::json json_num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

Calibration CalibrationCache::get(const SweepConfig& cfg, const Constellation& c, const LQuantizer& q) {
  const std::string key = cfg.format + "|" + fmt("%.17g", cfg.entropy_bpcu.value_or(0.0)) + "|" +
                          fmt("%.17g", cfg.aux_asi_target) + "|" + std::to_string(q.n_bin()) + "|" +
                          fmt("%.17g", q.delta_l()) + "|" + std::to_string(cfg.y_quant_levels) + "|" +
                          std::to_string(cfg.calibration_samples);
  std::promise<Calibration> promise;
  std::shared_future<Calibration> fut;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      fut = promise.get_future().share();
      entries_.emplace(key, fut);
      owner = true;
    } else {
      fut = it->second;
    }
  }
  if (owner) {
    try {
      CalibrationOptions opts;
      opts.samples = cfg.calibration_samples;
      opts.y_quant_levels = cfg.y_quant_levels;
      promise.set_value(calibrate_aux_snr(c, cfg.aux_asi_target, q, opts));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return fut.get();
}

std::size_t CalibrationCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

double resolve_aux_snr(const SweepConfig& cfg, const Constellation& c, const LQuantizer& q, double snr_db,
                       CalibrationCache& cache) {
  switch (cfg.aux_mode) {
    case AuxMode::FixedSnr: return cfg.aux_snr_db;
    case AuxMode::Matched: return snr_db;
    case AuxMode::AsiTarget: break;
  }
  return cache.get(cfg, c, q).snr_db;
}

std::uint64_t point_seed(std::uint64_t master, double snr_db) {
  return derive_seed(master, "snr=" + fmt("%.6f", snr_db));
}

PointOutput run_point(const SweepConfig& cfg, const Constellation& c, const LQuantizer& q, double aux_snr_db,
                      double snr_db, const BlindEstimator& estimator) {
  const std::string ctx = "point n_bin=" + std::to_string(q.n_bin()) + " snr_db=" + num(snr_db);
  try {
    PointOutput out;
    auto& r = out.row;
    r.n_bin = q.n_bin();
    r.delta_l = q.delta_l();
    r.l_max = q.l_max();
    r.snr_db = snr_db;
    r.aux_snr_db = aux_snr_db;
    r.seed = point_seed(cfg.seed, snr_db);

    const int m = c.bits_per_symbol();
    const std::size_t n_sym = (cfg.samples + static_cast<std::size_t>(m) - 1) / static_cast<std::size_t>(m);
    const auto tx = sample_symbols(c, n_sym, derive_seed(r.seed, "symbols"));
    const auto y = transmit(tx.symbols, ChannelConfig{snr_db, derive_seed(r.seed, "noise"), cfg.noiseless});
    const Demapper demapper(c, DemapperConfig{aux_snr_db, cfg.y_quant_levels, q});
    const auto l = demapper.demap(y);

    r.metrics = measure(c, tx.bits, l, cfg.compute_gmi);
    auto hist = build_histogram(l);
    r.blind = cfg.per_tributary ? estimator.estimate_per_tributary(l) : estimator.estimate(hist);
    r.asi_err = r.blind.asi_hat - r.metrics.asi;
    r.q_err_db = (r.blind.q_valid && std::isfinite(r.metrics.q_ber_db)) ? r.blind.q_hat_db - r.metrics.q_ber_db : kNaN;
    out.histogram.emplace(std::move(hist));
    return out;
  } catch (const Error&) {
    rethrow_with_context(ctx);
  }
}

PointOutput run_point(const SweepConfig& cfg, int n_bin, double snr_db, CalibrationCache& cache) {
  cfg.validate();
  const auto c = cfg.constellation();
  const auto q = cfg.quantizer(n_bin);
  const double aux = resolve_aux_snr(cfg, c, q, snr_db, cache);
  const BlindEstimator est(q, cfg.blind);
  return run_point(cfg, c, q, aux, snr_db, est);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex err_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first) first = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(workers, n); ++t) pool.emplace_back(work);
  pool.clear();
  if (first) std::rethrow_exception(first);
}

std::vector<PointResult> run_sweep(const SweepConfig& cfg, CalibrationCache* cache) {
  cfg.validate();
  CalibrationCache local;
  CalibrationCache& cc = cache ? *cache : local;
  const int threads = resolve_threads(cfg.threads);
  const auto c = cfg.constellation();

  struct PerBin {
    LQuantizer q;
    std::optional<BlindEstimator> est;
    double aux = 0.0;
  };
  std::vector<PerBin> bins;
  for (int nb : cfg.n_bin) bins.push_back(PerBin{cfg.quantizer(nb), std::nullopt, 0.0});
  parallel_for(bins.size(), threads, [&](std::size_t i) {
    auto& b = bins[i];
    b.est.emplace(b.q, cfg.blind);
    if (cfg.aux_mode == AuxMode::AsiTarget) {
      try {
        b.aux = cc.get(cfg, c, b.q).snr_db;
      } catch (const Error&) {
        rethrow_with_context("calibration n_bin=" + std::to_string(b.q.n_bin()));
      }
    }
  });

  const std::size_t n_snr = cfg.snr_db.size();
  std::vector<PointResult> rows(bins.size() * n_snr);
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const auto& b = bins[k / n_snr];
    const double snr = cfg.snr_db[k % n_snr];
    const double aux = cfg.aux_mode == AuxMode::AsiTarget ? b.aux : resolve_aux_snr(cfg, c, b.q, snr, cc);
    rows[k] = run_point(cfg, c, b.q, aux, snr, *b.est).row;
  });
  return rows;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "schema_version", "config_hash", "seed",      "format",     "entropy_bpcu", "n_bin",     "delta_l",
      "l_max",          "snr_db",      "aux_snr_db", "samples",   "asi",          "gmi_bpcu",  "ngmi",
      "s_opt",          "s_at_boundary", "ber_pre",  "q_ber_db",  "asi_hat",      "q_hat_db",  "q_valid",
      "mu_hat",         "sigma_hat",   "rho",        "fit_residual", "k_hat",     "saturated", "asi_err",
      "q_err_db"};
  return cols;
}

std::string csv_row(const SweepConfig& cfg, const std::string& hash, const PointResult& r) {
  const auto& m = r.metrics;
  const auto& b = r.blind;
  std::string s;
  auto add = [&s](const std::string& v) {
    if (!s.empty()) s += ',';
    s += v;
  };
  add(std::to_string(kResultSchemaVersion));
  add(hash);
  add(std::to_string(r.seed));
  add(cfg.format);
  add(cfg.entropy_bpcu ? num(*cfg.entropy_bpcu) : "");
  add(std::to_string(r.n_bin));
  add(num(r.delta_l));
  add(num(r.l_max));
  add(num(r.snr_db));
  add(num(r.aux_snr_db));
  add(std::to_string(m.sample_count));
  add(num(m.asi));
  add(num(m.gmi_bpcu));
  add(num(m.ngmi));
  add(num(m.s_opt));
  add(m.s_at_boundary ? "1" : "0");
  add(num(m.ber_pre));
  add(num(m.q_ber_db));
  add(num(b.asi_hat));
  add(num(b.q_hat_db));
  add(b.q_valid ? "1" : "0");
  add(num(b.mu_hat));
  add(num(b.sigma_hat));
  add(num(b.rho));
  add(num(b.fit_residual));
  add(std::to_string(b.k_hat));
  add(b.saturated ? "1" : "0");
  add(num(r.asi_err));
  add(num(r.q_err_db));
  return s;
}

void write_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<PointResult>& rows) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  const auto hash = config_hash(cfg);
  for (const auto& r : rows) os << csv_row(cfg, hash, r) << '\n';
}

nlohmann::json results_json(const SweepConfig& cfg, const std::vector<PointResult>& rows) {
  nlohmann::json j;
  j["schema_version"] = kResultSchemaVersion;
  j["config_hash"] = config_hash(cfg);
  j["config"] = canonical_json(cfg);
  auto& arr = j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    const auto& b = r.blind;
    arr.push_back({{"seed", r.seed},
                   {"n_bin", r.n_bin},
                   {"delta_l", r.delta_l},
                   {"l_max", r.l_max},
                   {"snr_db", r.snr_db},
                   {"aux_snr_db", r.aux_snr_db},
                   {"samples", m.sample_count},
                   {"asi", json_num(m.asi)},
                   {"gmi_bpcu", json_num(m.gmi_bpcu)},
                   {"ngmi", json_num(m.ngmi)},
                   {"s_opt", json_num(m.s_opt)},
                   {"s_at_boundary", m.s_at_boundary},
                   {"ber_pre", json_num(m.ber_pre)},
                   {"q_ber_db", json_num(m.q_ber_db)},
                   {"asi_hat", json_num(b.asi_hat)},
                   {"q_hat_db", json_num(b.q_hat_db)},
                   {"q_valid", b.q_valid},
                   {"mu_hat", b.mu_hat},
                   {"sigma_hat", b.sigma_hat},
                   {"rho", b.rho},
                   {"fit_residual", b.fit_residual},
                   {"k_hat", b.k_hat},
                   {"saturated", b.saturated},
                   {"asi_err", json_num(r.asi_err)},
                   {"q_err_db", json_num(r.q_err_db)}});
  }
  return j;
}

}  // namespace lvmon
