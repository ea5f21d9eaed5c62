#include "glx/cache.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>

#include "glx/report.hpp"

namespace glx {

namespace {
constexpr char kMagic[4] = {'G', 'L', 'X', 'G'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::optional<std::filesystem::path> green_cache_dir() {
    const char* dir = std::getenv("GLX_CACHE_DIR");
    if (!dir || !*dir) return std::nullopt;
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) return std::nullopt;
    return p;
}

std::string green_cache_key(const ModelSpec& model, const BoxDomain& domain) {
    const std::string raw = model.name() + "|box_d" + std::to_string(domain.d) + "_n" +
                            std::to_string(domain.n) + "|v" + std::to_string(kVersion);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(raw)));
    return std::string(buf) + ".glxg";
}

std::optional<GreenMatrix> load_cached_green(const ModelSpec& model, const BoxDomain& domain) {
    const auto dir = green_cache_dir();
    if (!dir) return std::nullopt;
    const auto path = *dir / green_cache_key(model, domain);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t n = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion ||
        n != static_cast<std::uint64_t>(domain.volume()))
        return std::nullopt;
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(cov.data()),
            static_cast<std::streamsize>(sizeof(double) * n * n));
    if (!in) return std::nullopt;
    return GreenMatrix(enumerate_box(domain.d, domain.n), std::move(cov), model.name() + " (cache)");
}

void store_cached_green(const ModelSpec& model, const BoxDomain& domain, const GreenMatrix& g) {
    const auto dir = green_cache_dir();
    if (!dir) return;
    const auto path = *dir / green_cache_key(model, domain);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return;
    const std::uint64_t n = static_cast<std::uint64_t>(g.size());
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(g.cov().data()),
              static_cast<std::streamsize>(sizeof(double) * n * n));
}

GreenMatrix finite_green_cached(const ModelSpec& model, const BoxDomain& domain) {
    if (auto cached = load_cached_green(model, domain)) return std::move(*cached);
    GreenMatrix g = finite_green(model, domain);
    store_cached_green(model, domain, g);
    return g;
}

}  // namespace glx
