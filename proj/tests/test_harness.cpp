#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include "lvmon/config.hpp"
#include "lvmon/errors.hpp"
#include "lvmon/harness.hpp"

using namespace lvmon;
using nlohmann::json;

namespace {

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.format = "16qam";
  cfg.entropy_bpcu.reset();
  cfg.snr_db = {8.0, 12.0};
  cfg.aux_mode = AuxMode::FixedSnr;
  cfg.aux_snr_db = 10.0;
  cfg.n_bin = {16, 32};
  cfg.l_max = 8.0;
  cfg.samples = 20'000;
  cfg.threads = 1;
  return cfg;
}

std::string csv_of(const SweepConfig& cfg, const std::vector<PointResult>& rows) {
  std::ostringstream os;
  write_csv(os, cfg, rows);
  return os.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config defaults and parsing") {
  const auto d = config_from_json(json{{"snr_db", 10}});
  CHECK(d.format == "ps-64qam");
  CHECK(d.aux_mode == AuxMode::AsiTarget);
  CHECK(d.aux_asi_target == 0.86);
  CHECK(d.l_max == 13.0);
  CHECK(d.n_bin == std::vector<int>{32});
  CHECK(d.snr_db == std::vector<double>{10.0});

  const auto r = config_from_json(json{{"snr_db", {{"start", 5}, {"stop", 6}, {"step", 0.5}}}});
  CHECK(r.snr_db == std::vector<double>{5.0, 5.5, 6.0});

  for (auto [name, value] : {std::pair{"FT#1", kFt1}, {"FT#2", kFt2}, {"ft3", kFt3}, {"2", kFt2}}) {
    CHECK(config_from_json(json{{"snr_db", 10}, {"fec_threshold", name}}).aux_asi_target == value);
  }
  CHECK_THROWS_AS(fec_threshold_preset("FT#4"), ConfigError);
  CHECK(config_from_json(json{{"snr_db", 10}, {"matched_aux", true}}).aux_mode == AuxMode::Matched);
  CHECK(config_from_json(json{{"snr_db", 10}, {"aux_snr_db", 7}}).aux_mode == AuxMode::FixedSnr);

  CHECK_THROWS_AS(config_from_json(json{{"snr_db", 10}, {"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"snr_db", 10}, {"delta_l", 0.1}, {"l_max", 8}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"snr_db", 10}, {"aux_snr_db", 7}, {"fec_threshold", "FT#1"}}),
                  ConfigError);
  auto validated = [](const json& j) { config_from_json(j).validate(); };
  CHECK_NOTHROW(validated(json{{"snr_db", 10}}));
  CHECK_THROWS_AS(validated(json{{"snr_db", json::array()}}), ConfigError);
  CHECK_THROWS_AS(validated(json{{"snr_db", 10}, {"samples", 9999}}), ConfigError);
  CHECK_THROWS_AS(validated(json{{"snr_db", 10}, {"n_bin", {7}}}), ConfigError);
  CHECK_THROWS_AS(validated(json{{"snr_db", 10}, {"format", "8psk"}}), ConfigError);
  CHECK_THROWS_AS(validated(json{{"snr_db", 10}, {"aux_asi_target", 1.0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"snr_db", "ten"}}), ConfigError);

  const auto dl = config_from_json(json{{"snr_db", 10}, {"n_bin", {200}}, {"delta_l", 1.0 / 13}});
  CHECK(dl.quantizer(200).delta_l() == 1.0 / 13);
}

TEST_CASE("config hash tracks result-relevant fields only") {
  auto a = small_config();
  auto b = a;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.threads = 4;
  b.csv_path = "x.csv";
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.blind.overload_correction = false;
  CHECK(config_hash(a) != config_hash(b));
  // The canonical form parses back to the same configuration.
  CHECK(config_hash(config_from_json(canonical_json(a))) == config_hash(a));
}

TEST_CASE("sweep is deterministic and independent of the thread count") {
  auto cfg = small_config();
  const auto one = run_sweep(cfg);
  const auto again = run_sweep(cfg);
  cfg.threads = 3;
  const auto three = run_sweep(cfg);
  CHECK(csv_of(cfg, one) == csv_of(cfg, again));
  CHECK(csv_of(cfg, one) == csv_of(cfg, three));
  REQUIRE(one.size() == 4);
  CHECK(one[0].n_bin == 16);
  CHECK(one[1].snr_db == 12.0);
  CHECK(one[2].n_bin == 32);

  auto other = cfg;
  other.seed = 77;
  const auto diff = run_sweep(other);
  CHECK(diff.size() == one.size());
  CHECK(diff[0].metrics.asi != one[0].metrics.asi);
}

TEST_CASE("n_bin variants share channel realizations") {
  // Same seed per SNR: BER_pre is decided by L signs, which do not depend on n_bin.
  const auto rows = run_sweep(small_config());
  CHECK(rows[0].metrics.ber_pre == rows[2].metrics.ber_pre);
  CHECK(rows[0].seed == rows[2].seed);
  CHECK(point_seed(1, 8.0) != point_seed(1, 12.0));
}

TEST_CASE("noiseless points") {
  auto cfg = small_config();
  cfg.noiseless = true;
  cfg.aux_snr_db = 20.0;
  cfg.snr_db = {10.0};
  cfg.n_bin = {64};
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].metrics.asi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rows[0].blind.asi_hat == doctest::Approx(1.0).epsilon(0.01));
  CHECK(rows[0].metrics.ber_pre == 0.0);
  CHECK(std::isinf(rows[0].metrics.q_ber_db));
  CHECK(std::isnan(rows[0].q_err_db));
}

TEST_CASE("csv and json schema") {
  const auto cfg = small_config();
  const auto rows = run_sweep(cfg);
  const auto text = csv_of(cfg, rows);
  std::istringstream is(text);
  std::string header;
  std::getline(is, header);
  std::string expected;
  for (const auto& c : csv_columns()) expected += (expected.empty() ? "" : ",") + c;
  CHECK(header == expected);
  CHECK(header.rfind("schema_version,config_hash,seed,", 0) == 0);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    CHECK(std::count(line.begin(), line.end(), ',') + 1 == static_cast<long>(csv_columns().size()));
    CHECK(line.rfind("1," + config_hash(cfg) + ",", 0) == 0);
  }
  CHECK(n == 4);

  const auto j = results_json(cfg, rows);
  CHECK(j["schema_version"] == kResultSchemaVersion);
  CHECK(j["config_hash"] == config_hash(cfg));
  REQUIRE(j["rows"].size() == 4);
  for (const auto& c : csv_columns()) {
    // Run-level columns live at the top level and in "config".
    if (c == "schema_version" || c == "config_hash" || c == "format" || c == "entropy_bpcu") continue;
    CHECK_MESSAGE(j["rows"][0].contains(c), c);
  }
}

TEST_CASE("metric columns are consistent") {
  const auto rows = run_sweep(small_config());
  for (const auto& r : rows) {
    CHECK(r.metrics.asi >= 0.0);
    CHECK(r.metrics.asi <= 1.0);
    CHECK(r.metrics.ngmi <= 1.0);
    CHECK(r.asi_err == r.blind.asi_hat - r.metrics.asi);
    CHECK(r.l_max == doctest::Approx(8.0));
    CHECK(r.metrics.sample_count >= 20'000);
  }
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(5) == 5);
  ::setenv("LVMON_THREADS", "3", 1);
  CHECK(resolve_threads(0) == 3);
  ::setenv("LVMON_THREADS", "abc", 1);
  CHECK_THROWS_AS(resolve_threads(0), ConfigError);
  ::unsetenv("LVMON_THREADS");
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("parallel_for covers every index and propagates failures") {
  std::vector<int> hit(50, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  CHECK(std::count(hit.begin(), hit.end(), 1) == 50);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw DomainError("boom");
                               }),
                  DomainError);
}

TEST_CASE("calibration cache runs once per key") {
  auto cfg = small_config();
  cfg.format = "qpsk";
  cfg.aux_mode = AuxMode::AsiTarget;
  cfg.aux_asi_target = 0.86;
  cfg.calibration_samples = 100'000;
  cfg.n_bin = {32};
  cfg.threads = 2;
  CalibrationCache cache;
  const auto rows = run_sweep(cfg, &cache);
  CHECK(cache.size() == 1);
  CHECK(rows[0].aux_snr_db == rows[1].aux_snr_db);
  run_sweep(cfg, &cache);
  CHECK(cache.size() == 1);
  cfg.aux_asi_target = 0.93;
  run_sweep(cfg, &cache);
  CHECK(cache.size() == 2);
}

TEST_CASE("matched mode uses the channel SNR") {
  auto cfg = small_config();
  cfg.aux_mode = AuxMode::Matched;
  const auto rows = run_sweep(cfg);
  for (const auto& r : rows) CHECK(r.aux_snr_db == r.snr_db);
}

}
