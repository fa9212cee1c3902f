// lvmon: L-value histogram performance monitor (simulation, sweeps, blind estimation).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lvmon/config.hpp"
#include "lvmon/errors.hpp"
#include "lvmon/harness.hpp"
#include "lvmon/histogram_io.hpp"

namespace {

using namespace lvmon;

double parse_threshold(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  return fec_threshold_preset(s);
}

std::vector<double> parse_snr_range(const std::string& s) {
  double a = 0, b = 0, st = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &a, &b, &st, &tail) != 3 || !(st > 0) || b < a) {
    throw ConfigError("--snr-range expects start:stop:step with step > 0, got '" + s + "'");
  }
  return config_from_json({{"snr_db", {{"start", a}, {"stop", b}, {"step", st}}}}).snr_db;
}

// Command-line values that override the config file.
struct Overrides {
  std::string config_path;
  std::optional<std::string> format;
  std::optional<double> entropy;
  std::vector<double> snr;
  std::optional<std::string> snr_range;
  std::optional<double> aux_snr;
  std::optional<std::string> fec_threshold;
  bool matched = false;
  std::vector<int> n_bin;
  std::optional<double> l_max;
  std::optional<double> delta_l;
  std::optional<int> y_levels;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> calibration_samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool no_gmi = false;
  bool noiseless = false;
  bool per_tributary = false;
  std::optional<std::string> csv_path;
  std::optional<std::string> json_path;

  void attach(CLI::App* app, bool multi) {
    app->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--format", format, "qpsk, 16qam, 64qam, 256qam, ps-16qam, ps-64qam, ps-256qam");
    app->add_option("--entropy", entropy, "symbol entropy in bpcu (PS formats)");
    if (multi) {
      app->add_option("--snr", snr, "channel SNR list in dB")->delimiter(',');
      app->add_option("--snr-range", snr_range, "start:stop:step in dB");
      app->add_option("--n-bin", n_bin, "L-value bin counts")->delimiter(',');
      app->add_option("--threads", threads, "worker threads (default: LVMON_THREADS or all cores)");
    } else {
      app->add_option("--snr", snr, "channel SNR in dB")->expected(1);
      app->add_option("--n-bin", n_bin, "L-value bin count")->expected(1);
    }
    auto* aux = app->add_option("--aux-snr", aux_snr, "fixed auxiliary-channel SNR in dB");
    auto* ft = app->add_option("--fec-threshold", fec_threshold, "aux ASI target: number or FT#1/FT#2/FT#3");
    auto* mt = app->add_flag("--matched", matched, "auxiliary SNR equal to the channel SNR");
    aux->excludes(ft)->excludes(mt);
    ft->excludes(mt);
    auto* lm = app->add_option("--l-max", l_max, "largest L-value magnitude");
    app->add_option("--delta-l", delta_l, "L-value step")->excludes(lm);
    app->add_option("--y-levels", y_levels, "received-sample quantization levels per dimension");
    app->add_option("--samples", samples, "L-values per point");
    app->add_option("--calibration-samples", calibration_samples, "L-values per calibration probe");
    app->add_option("--seed", seed, "master seed");
    app->add_flag("--no-gmi", no_gmi, "skip the GMI search");
    app->add_flag("--noiseless", noiseless, "bypass the noise source");
    app->add_flag("--per-tributary", per_tributary, "estimate per tributary and average");
  }

  SweepConfig resolve() const {
    SweepConfig c = config_path.empty() ? SweepConfig{} : load_config(config_path);
    if (format) {
      c.format = *format;
      if (!entropy && c.format.rfind("ps-", 0) != 0) c.entropy_bpcu.reset();
    }
    if (entropy) c.entropy_bpcu = *entropy;
    if (!snr.empty()) c.snr_db = snr;
    if (snr_range) c.snr_db = parse_snr_range(*snr_range);
    if (aux_snr) {
      c.aux_mode = AuxMode::FixedSnr;
      c.aux_snr_db = *aux_snr;
    }
    if (fec_threshold) {
      c.aux_mode = AuxMode::AsiTarget;
      c.aux_asi_target = parse_threshold(*fec_threshold);
    }
    if (matched) c.aux_mode = AuxMode::Matched;
    if (!n_bin.empty()) c.n_bin = n_bin;
    if (l_max) {
      c.l_max = *l_max;
      c.delta_l.reset();
    }
    if (delta_l) c.delta_l = *delta_l;
    if (y_levels) c.y_quant_levels = *y_levels;
    if (samples) c.samples = *samples;
    if (calibration_samples) c.calibration_samples = *calibration_samples;
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    if (no_gmi) c.compute_gmi = false;
    if (noiseless) c.noiseless = true;
    if (per_tributary) c.per_tributary = true;
    if (csv_path) c.csv_path = *csv_path;
    if (json_path) c.json_path = *json_path;
    return c;
  }
};

void print_point(const PointResult& r) {
  const auto& m = r.metrics;
  const auto& b = r.blind;
  std::printf("n_bin         %d (l_max %.4g, delta_l %.6g)\n", r.n_bin, r.l_max, r.delta_l);
  std::printf("snr_db        %.4g (aux %.4f)\n", r.snr_db, r.aux_snr_db);
  std::printf("samples       %zu\n", m.sample_count);
  std::printf("asi           %.6f\n", m.asi);
  std::printf("gmi_bpcu      %.6f (s_opt %.4f%s)\n", m.gmi_bpcu, m.s_opt, m.s_at_boundary ? ", at bracket edge" : "");
  std::printf("ngmi          %.6f\n", m.ngmi);
  std::printf("ber_pre       %.6e\n", m.ber_pre);
  std::printf("q_ber_db      %.4f\n", m.q_ber_db);
  std::printf("asi_hat       %.6f (err %+.6f)\n", b.asi_hat, r.asi_err);
  if (b.q_valid) std::printf("q_hat_db      %.4f (err %+.4f)\n", b.q_hat_db, r.q_err_db);
  else std::printf("q_hat_db      invalid\n");
  std::printf("rho           %.6f\n", b.rho);
  std::printf("mu/sigma      %.4f / %.4f (k %zu, residual %.3e)\n", b.mu_hat, b.sigma_hat, b.k_hat, b.fit_residual);
}

int cmd_simulate(const Overrides& o, const std::string& hist_out, bool csv) {
  auto cfg = o.resolve();
  if (cfg.snr_db.size() != 1) throw ConfigError("simulate needs exactly one --snr (or one snr_db in the config)");
  if (cfg.n_bin.size() != 1) throw ConfigError("simulate needs exactly one n_bin");
  CalibrationCache cache;
  const auto out = run_point(cfg, cfg.n_bin.front(), cfg.snr_db.front(), cache);
  if (csv) {
    write_csv(std::cout, cfg, {out.row});
  } else {
    print_point(out.row);
  }
  if (!hist_out.empty()) {
    write_histogram(hist_out, *out.histogram,
                    {{"format", cfg.format},
                     {"snr_db", out.row.snr_db},
                     {"aux_snr_db", out.row.aux_snr_db},
                     {"seed", out.row.seed},
                     {"config_hash", config_hash(cfg)},
                     {"asi", out.row.metrics.asi}});
  }
  return 0;
}

int cmd_sweep(const Overrides& o) {
  auto cfg = o.resolve();
  const auto rows = run_sweep(cfg);
  if (!cfg.csv_path.empty()) {
    std::ofstream f(cfg.csv_path);
    if (!f) throw ConfigError("cannot write " + cfg.csv_path);
    write_csv(f, cfg, rows);
  }
  if (!cfg.json_path.empty()) {
    std::ofstream f(cfg.json_path);
    if (!f) throw ConfigError("cannot write " + cfg.json_path);
    f << results_json(cfg, rows).dump(2) << '\n';
  }
  if (cfg.csv_path.empty() && cfg.json_path.empty()) write_csv(std::cout, cfg, rows);
  return 0;
}

int cmd_estimate(const std::string& path, const std::string& threshold, const CandidateGrid& grid, bool measured,
                 bool no_correction, bool json) {
  const auto hist = read_histogram(path);
  BlindOptions opts;
  opts.grid = grid;
  opts.use_measured_marginal = measured;
  opts.overload_correction = !no_correction;
  const auto e = estimate(hist, opts);
  const double ft = parse_threshold(threshold);
  if (json) {
    nlohmann::json j = {{"asi_hat", e.asi_hat},
                        {"q_hat_db", e.q_valid ? nlohmann::json(e.q_hat_db) : nlohmann::json(nullptr)},
                        {"q_valid", e.q_valid},
                        {"fec_threshold", ft},
                        {"margin", e.asi_hat - ft},
                        {"fit_residual", e.fit_residual},
                        {"mu_hat", e.mu_hat},
                        {"sigma_hat", e.sigma_hat},
                        {"rho", e.rho},
                        {"k_hat", e.k_hat},
                        {"saturated", e.saturated},
                        {"total", hist.total()}};
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::printf("asi_hat       %.6f\n", e.asi_hat);
  if (e.q_valid) std::printf("q_hat_db      %.4f\n", e.q_hat_db);
  else std::printf("q_hat_db      invalid%s\n", e.saturated ? " (all samples saturated)" : "");
  std::printf("margin        %+.6f (threshold %.4g)\n", e.asi_hat - ft, ft);
  std::printf("fit_residual  %.6e\n", e.fit_residual);
  std::printf("mu/sigma      %.4f / %.4f, rho %.6f, samples %llu\n", e.mu_hat, e.sigma_hat, e.rho,
              static_cast<unsigned long long>(hist.total()));
  return 0;
}

int cmd_calibrate(const Overrides& o, const std::string& threshold) {
  auto cfg = o.resolve();
  cfg.aux_mode = AuxMode::AsiTarget;
  if (!threshold.empty()) cfg.aux_asi_target = parse_threshold(threshold);
  if (cfg.snr_db.empty()) cfg.snr_db = {0.0};  // not used; keeps validation about the fields that matter
  cfg.validate();
  CalibrationCache cache;
  for (int nb : cfg.n_bin) {
    const auto q = cfg.quantizer(nb);
    const auto cal = cache.get(cfg, cfg.constellation(), q);
    std::printf("format %s n_bin %d l_max %.4g target %.4f -> aux_snr_db %.4f (asi %.5f, %d probes)\n",
                cfg.format.c_str(), nb, q.l_max(), cfg.aux_asi_target, cal.snr_db, cal.asi, cal.probes);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lvmon: blind ASI / Q-factor monitoring from L-value histograms"};
  app.require_subcommand(1);

  Overrides sim_o, sweep_o, cal_o;
  std::string hist_out;
  bool sim_csv = false;
  auto* sim = app.add_subcommand("simulate", "simulate one point and print true and blind metrics");
  sim_o.attach(sim, false);
  sim->add_option("--histogram", hist_out, "write the pooled |L| histogram as JSON");
  sim->add_flag("--csv", sim_csv, "print a CSV header and row instead of the summary");

  auto* sweep = app.add_subcommand("sweep", "run an (n_bin x SNR) sweep and write CSV/JSON rows");
  sweep_o.attach(sweep, true);
  sweep->add_option("--csv", sweep_o.csv_path, "CSV output path");
  sweep->add_option("--json", sweep_o.json_path, "JSON output path");

  auto* est = app.add_subcommand("estimate", "blind ASI and Q from a histogram file");
  std::string est_path, est_ft = "0.86";
  CandidateGrid grid;
  bool est_measured = false, est_nocorr = false, est_json = false;
  est->add_option("histogram", est_path, "histogram JSON")->required()->check(CLI::ExistingFile);
  est->add_option("--fec-threshold", est_ft, "ASI threshold for the margin: number or FT#1/FT#2/FT#3");
  est->add_option("--n-mu", grid.n_mu, "candidate means");
  est->add_option("--n-sigma", grid.n_sigma, "candidate deviations");
  est->add_flag("--measured-marginal", est_measured, "weight with the measured |L| pmf");
  est->add_flag("--no-overload-correction", est_nocorr, "drop the (1 - rho) factor in the Q estimate");
  est->add_flag("--json", est_json, "print JSON");

  auto* cal = app.add_subcommand("calibrate", "auxiliary SNR at an ASI target");
  cal_o.attach(cal, true);
  std::string cal_target;
  cal->add_option("--target", cal_target, "ASI target (alias of --fec-threshold)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(sim_o, hist_out, sim_csv);
    if (*sweep) return cmd_sweep(sweep_o);
    if (*est) return cmd_estimate(est_path, est_ft, grid, est_measured, est_nocorr, est_json);
    if (*cal) return cmd_calibrate(cal_o, cal_target.empty() ? cal_o.fec_threshold.value_or("") : cal_target);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "lvmon: configuration error: %s\n", e.what());
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "lvmon: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "lvmon: %s\n", e.what());
    return 3;
  }
  return 0;
}
