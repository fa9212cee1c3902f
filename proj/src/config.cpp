#include "lvmon/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include "lvmon/errors.hpp"
#include "lvmon/rng.hpp"

namespace lvmon {

using nlohmann::json;

double fec_threshold_preset(std::string_view name) {
  std::string s;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (s == "ft1" || s == "1") return kFt1;
  if (s == "ft2" || s == "2") return kFt2;
  if (s == "ft3" || s == "3") return kFt3;
  throw ConfigError("unknown FEC threshold preset '" + std::string(name) + "' (expected FT#1, FT#2 or FT#3)");
}

Constellation make_constellation(const std::string& format, std::optional<double> entropy_bpcu) {
  static const std::pair<const char*, int> kUniform[] = {{"qpsk", 2}, {"4qam", 2}, {"16qam", 4}, {"64qam", 6}, {"256qam", 8}};
  static const std::pair<const char*, int> kShaped[] = {{"ps-16qam", 4}, {"ps-64qam", 6}, {"ps-256qam", 8}};
  for (const auto& [name, m] : kUniform) {
    if (format == name) return Constellation::uniform_qam(m);
  }
  for (const auto& [name, m] : kShaped) {
    if (format == name) {
      if (!entropy_bpcu) throw ConfigError("format " + format + " needs entropy_bpcu");
      return Constellation::ps_qam(m, *entropy_bpcu);
    }
  }
  throw ConfigError("unknown format '" + format + "'");
}

LQuantizer SweepConfig::quantizer(int nb) const {
  return delta_l ? LQuantizer(nb, *delta_l) : LQuantizer::with_l_max(nb, l_max);
}

void SweepConfig::validate() const {
  if (snr_db.empty()) throw ConfigError("snr_db grid is empty");
  if (n_bin.empty()) throw ConfigError("n_bin list is empty");
  for (double s : snr_db) {
    if (!std::isfinite(s)) throw ConfigError("snr_db values must be finite");
  }
  for (int nb : n_bin) (void)quantizer(nb);
  if (!delta_l && !(l_max > 0.0)) throw ConfigError("l_max must be positive");
  if (samples < 10'000) throw ConfigError("samples must be at least 10^4, got " + std::to_string(samples));
  if (calibration_samples < 10'000) throw ConfigError("calibration_samples must be at least 10^4");
  if (y_quant_levels < 64 || y_quant_levels > 1024) throw ConfigError("y_quant_levels must be in [64, 1024]");
  if (aux_mode == AuxMode::AsiTarget && !(aux_asi_target > 0.0 && aux_asi_target < 1.0)) {
    throw ConfigError("aux_asi_target must be in (0, 1)");
  }
  if (aux_mode == AuxMode::FixedSnr && !std::isfinite(aux_snr_db)) throw ConfigError("aux_snr_db must be finite");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  const auto& g = blind.grid;
  if (g.n_mu < 1 || g.n_sigma < 1 || !(g.mu_span > 0.0) || !(g.sigma_span > 0.0)) {
    throw ConfigError("candidate grid needs positive sizes and spans");
  }
  (void)constellation();
}

namespace {

std::vector<double> parse_snr_grid(const json& v) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) return v.get<std::vector<double>>();
  if (v.is_object()) {
    const double start = v.at("start").get<double>();
    const double stop = v.at("stop").get<double>();
    const double step = v.at("step").get<double>();
    if (!(step > 0.0) || stop < start) throw ConfigError("snr_db range needs step > 0 and stop >= start");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  throw ConfigError("snr_db must be a number, a list or {start, stop, step}");
}

}  // namespace

SweepConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> kKeys = {
      "format", "entropy_bpcu", "snr_db", "aux_asi_target", "fec_threshold", "aux_snr_db", "matched_aux",
      "n_bin", "delta_l", "l_max", "y_quant_levels", "samples", "calibration_samples", "seed", "threads",
      "compute_gmi", "noiseless", "per_tributary", "grid", "use_measured_marginal", "overload_correction",
      "output"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }

  SweepConfig c;
  try {
    if (j.contains("format")) c.format = j["format"].get<std::string>();
    if (j.contains("entropy_bpcu")) {
      if (j["entropy_bpcu"].is_null()) c.entropy_bpcu.reset();
      else c.entropy_bpcu = j["entropy_bpcu"].get<double>();
    }
    if (j.contains("snr_db")) c.snr_db = parse_snr_grid(j["snr_db"]);

    int aux_keys = 0;
    if (j.contains("aux_asi_target")) {
      c.aux_mode = AuxMode::AsiTarget;
      c.aux_asi_target = j["aux_asi_target"].get<double>();
      ++aux_keys;
    }
    if (j.contains("fec_threshold")) {
      c.aux_mode = AuxMode::AsiTarget;
      const auto& v = j["fec_threshold"];
      c.aux_asi_target = v.is_string() ? fec_threshold_preset(v.get<std::string>()) : v.get<double>();
      ++aux_keys;
    }
    if (j.contains("aux_snr_db")) {
      c.aux_mode = AuxMode::FixedSnr;
      c.aux_snr_db = j["aux_snr_db"].get<double>();
      ++aux_keys;
    }
    if (j.value("matched_aux", false)) {
      c.aux_mode = AuxMode::Matched;
      ++aux_keys;
    }
    if (aux_keys > 1) {
      throw ConfigError("config: give at most one of aux_asi_target, fec_threshold, aux_snr_db, matched_aux");
    }

    if (j.contains("n_bin")) {
      const auto& v = j["n_bin"];
      c.n_bin = v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()};
    }
    if (j.contains("delta_l") && j.contains("l_max")) throw ConfigError("config: give delta_l or l_max, not both");
    if (j.contains("delta_l")) c.delta_l = j["delta_l"].get<double>();
    if (j.contains("l_max")) c.l_max = j["l_max"].get<double>();
    if (j.contains("y_quant_levels")) c.y_quant_levels = j["y_quant_levels"].get<int>();
    if (j.contains("samples")) c.samples = j["samples"].get<std::size_t>();
    if (j.contains("calibration_samples")) c.calibration_samples = j["calibration_samples"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("compute_gmi")) c.compute_gmi = j["compute_gmi"].get<bool>();
    if (j.contains("noiseless")) c.noiseless = j["noiseless"].get<bool>();
    if (j.contains("per_tributary")) c.per_tributary = j["per_tributary"].get<bool>();
    if (j.contains("use_measured_marginal")) c.blind.use_measured_marginal = j["use_measured_marginal"].get<bool>();
    if (j.contains("overload_correction")) c.blind.overload_correction = j["overload_correction"].get<bool>();
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      c.blind.grid.n_mu = g.value("n_mu", c.blind.grid.n_mu);
      c.blind.grid.n_sigma = g.value("n_sigma", c.blind.grid.n_sigma);
      c.blind.grid.mu_span = g.value("mu_span", c.blind.grid.mu_span);
      c.blind.grid.sigma_span = g.value("sigma_span", c.blind.grid.sigma_span);
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      c.csv_path = o.value("csv", std::string{});
      c.json_path = o.value("json", std::string{});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json canonical_json(const SweepConfig& c) {
  json j;
  j["format"] = c.format;
  j["entropy_bpcu"] = c.entropy_bpcu ? json(*c.entropy_bpcu) : json(nullptr);
  j["snr_db"] = c.snr_db;
  switch (c.aux_mode) {
    case AuxMode::AsiTarget: j["aux_asi_target"] = c.aux_asi_target; break;
    case AuxMode::FixedSnr: j["aux_snr_db"] = c.aux_snr_db; break;
    case AuxMode::Matched: j["matched_aux"] = true; break;
  }
  j["n_bin"] = c.n_bin;
  if (c.delta_l) j["delta_l"] = *c.delta_l;
  else j["l_max"] = c.l_max;
  j["y_quant_levels"] = c.y_quant_levels;
  j["samples"] = c.samples;
  j["calibration_samples"] = c.calibration_samples;
  j["seed"] = c.seed;
  j["compute_gmi"] = c.compute_gmi;
  j["noiseless"] = c.noiseless;
  j["per_tributary"] = c.per_tributary;
  j["use_measured_marginal"] = c.blind.use_measured_marginal;
  j["overload_correction"] = c.blind.overload_correction;
  j["grid"] = {{"n_mu", c.blind.grid.n_mu},
               {"n_sigma", c.blind.grid.n_sigma},
               {"mu_span", c.blind.grid.mu_span},
               {"sigma_span", c.blind.grid.sigma_span}};
  return j;
}

std::string config_hash(const SweepConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json(cfg).dump())));
  return buf;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LVMON_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
    throw ConfigError(std::string("LVMON_THREADS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

}  // namespace lvmon
