#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lvmon/blind.hpp"

namespace lvmon {

/// Histogram exchange format:
///   {"n_bin": int, "delta_l": number, "counts_abs": [n_bin/2 counts, ascending l],
///    "total": int, "meta": {...}}
/// "total" must equal the sum of "counts_abs". "meta" is optional and free-form.
nlohmann::json histogram_to_json(const LHistogram& h, const nlohmann::json& meta = nlohmann::json::object());
LHistogram histogram_from_json(const nlohmann::json& j);

/// Throws ConfigError on unreadable files or malformed content.
LHistogram read_histogram(const std::filesystem::path& path);
void write_histogram(const std::filesystem::path& path, const LHistogram& h,
                     const nlohmann::json& meta = nlohmann::json::object());

}  // namespace lvmon
