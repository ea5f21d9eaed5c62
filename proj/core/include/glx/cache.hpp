#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "glx/green.hpp"

namespace glx {

// Binary Green-matrix cache under GLX_CACHE_DIR (disabled when unset).
std::optional<std::filesystem::path> green_cache_dir();

std::string green_cache_key(const ModelSpec& model, const BoxDomain& domain);

std::optional<GreenMatrix> load_cached_green(const ModelSpec& model, const BoxDomain& domain);
void store_cached_green(const ModelSpec& model, const BoxDomain& domain, const GreenMatrix& g);

// finite_green with cache lookup
GreenMatrix finite_green_cached(const ModelSpec& model, const BoxDomain& domain);

}  // namespace glx
