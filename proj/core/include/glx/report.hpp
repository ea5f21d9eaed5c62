#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace glx {

std::uint64_t fnv1a64(std::string_view bytes);

// 16-hex-digit hash of the canonical (key-sorted) JSON dump.
std::string config_hash(const nlohmann::json& canonical);

// shortest round-trip decimal representation; fixed across runs
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

struct RunManifest {
    std::string config_hash;
    std::string artifact_version;
    double wall_ms = 0;
    nlohmann::json tolerances;
    nlohmann::json flags;
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
};

}  // namespace glx
