#include "lvmon/histogram_io.hpp"

#include <fstream>
#include <numeric>

#include "lvmon/errors.hpp"

namespace lvmon {

using nlohmann::json;

json histogram_to_json(const LHistogram& h, const json& meta) {
  const auto counts = h.counts();
  json j;
  j["n_bin"] = h.quantizer().n_bin();
  j["delta_l"] = h.quantizer().delta_l();
  j["counts_abs"] = std::vector<std::uint64_t>(counts.begin(), counts.end());
  j["total"] = h.total();
  j["meta"] = meta.is_null() ? json::object() : meta;
  return j;
}

namespace {
// Accepts signed or unsigned JSON integers as long as they are >= 0.
bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}
}  // namespace

LHistogram histogram_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("histogram: top level must be an object");
  for (const char* key : {"n_bin", "delta_l", "counts_abs", "total"}) {
    if (!j.contains(key)) throw ConfigError(std::string("histogram: missing key '") + key + "'");
  }
  if (!j["n_bin"].is_number_integer()) throw ConfigError("histogram: n_bin must be an integer");
  if (!j["delta_l"].is_number()) throw ConfigError("histogram: delta_l must be a number");
  if (!j["counts_abs"].is_array()) throw ConfigError("histogram: counts_abs must be an array");
  if (!is_count(j["total"])) throw ConfigError("histogram: total must be a non-negative integer");

  const auto n_bin = j["n_bin"].get<std::int64_t>();
  if (n_bin < 2 || n_bin > 65536) throw ConfigError("histogram: n_bin out of range");
  LQuantizer q(static_cast<int>(n_bin), j["delta_l"].get<double>());

  std::vector<std::uint64_t> counts;
  counts.reserve(j["counts_abs"].size());
  for (const auto& c : j["counts_abs"]) {
    if (!is_count(c)) throw ConfigError("histogram: counts_abs entries must be non-negative integers");
    counts.push_back(c.get<std::uint64_t>());
  }
  if (counts.size() != static_cast<std::size_t>(n_bin / 2)) {
    throw ConfigError("histogram: counts_abs has " + std::to_string(counts.size()) + " entries, expected n_bin/2 = " +
                      std::to_string(n_bin / 2));
  }
  const auto sum = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (sum != j["total"].get<std::uint64_t>()) {
    throw ConfigError("histogram: total " + std::to_string(j["total"].get<std::uint64_t>()) +
                      " does not match the sum of counts_abs " + std::to_string(sum));
  }
  if (sum == 0) throw ConfigError("histogram: no samples");
  return LHistogram(q, std::move(counts));
}

LHistogram read_histogram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open histogram file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("histogram file " + path.string() + ": " + e.what());
  }
  return histogram_from_json(j);
}

void write_histogram(const std::filesystem::path& path, const LHistogram& h, const json& meta) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write histogram file " + path.string());
  out << histogram_to_json(h, meta).dump(2) << '\n';
}

}  // namespace lvmon
