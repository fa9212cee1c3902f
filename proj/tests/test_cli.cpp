#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LVMON_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p) != nullptr) r.out += buf.data();
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "lvmon_test_cli";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate, export and estimate") {
  const auto hist = scratch() / "h.json";
  const auto sim = run("simulate --format 16qam --snr 10 --aux-snr 10 --n-bin 64 --l-max 8 --samples 40000 "
                       "--histogram " + hist.string());
  REQUIRE(sim.status == 0);
  CHECK(sim.out.find("asi_hat") != std::string::npos);
  REQUIRE(std::filesystem::exists(hist));

  const auto est = run("estimate " + hist.string() + " --fec-threshold FT#2");
  CHECK(est.status == 0);
  for (const char* field : {"asi_hat", "q_hat_db", "margin", "fit_residual", "mu/sigma"}) {
    CHECK_MESSAGE(est.out.find(field) != std::string::npos, field);
  }

  const auto js = run("estimate " + hist.string() + " --json");
  REQUIRE(js.status == 0);
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j["fec_threshold"] == 0.86);
  CHECK(j["total"] == 40000);
  CHECK(j["asi_hat"].get<double>() > 0.5);
}

TEST_CASE("simulate csv output") {
  const auto r = run("simulate --format qpsk --snr 6 --aux-snr 6 --n-bin 32 --samples 20000 --csv");
  REQUIRE(r.status == 0);
  CHECK(r.out.rfind("schema_version,config_hash,seed,format,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);
}

TEST_CASE("sweep writes csv and json") {
  const auto dir = scratch();
  const auto r = run("sweep --format qpsk --snr 4,8 --aux-snr 6 --n-bin 16,32 --samples 20000 --threads 2 --csv " +
                     (dir / "s.csv").string() + " --json " + (dir / "s.json").string());
  REQUIRE(r.status == 0);
  std::ifstream f(dir / "s.json");
  const auto j = nlohmann::json::parse(f);
  CHECK(j["rows"].size() == 4);
  std::ifstream c(dir / "s.csv");
  std::string line;
  int n = 0;
  while (std::getline(c, line)) ++n;
  CHECK(n == 5);
}

TEST_CASE("calibrate prints the auxiliary SNR") {
  const auto r = run("calibrate --format qpsk --target 0.86 --n-bin 32 --calibration-samples 100000");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("aux_snr_db") != std::string::npos);
}

TEST_CASE("errors map to exit codes") {
  const auto dir = scratch();
  std::ofstream(dir / "bad.json") << R"({"n_bin": 4, "delta_l": 1.0, "counts_abs": [1, 2], "total": 5})";
  CHECK(run("estimate " + (dir / "bad.json").string()).status == 2);
  std::ofstream(dir / "cfg.json") << R"({"snr_db": []})";
  CHECK(run("sweep -c " + (dir / "cfg.json").string()).status == 2);
  CHECK(run("simulate --snr 10 --n-bin 7").status == 2);
  CHECK(run("simulate --format qpsk --snr 10 --aux-snr 5 --fec-threshold FT#1").status != 0);
  CHECK(run("").status != 0);
}

}
