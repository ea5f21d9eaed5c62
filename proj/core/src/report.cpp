#include "glx/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace glx {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const nlohmann::json& canonical) {
    const std::uint64_t h = fnv1a64(canonical.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_json: cannot open " + path.string());
    out << j.dump(2) << '\n';
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["artifact_version"] = artifact_version;
    j["wall_ms"] = wall_ms;
    j["tolerances"] = tolerances;
    j["flags"] = flags;
    j["outputs"] = outputs;
    j["norm"] = "l2";
    return j;
}

}  // namespace glx
