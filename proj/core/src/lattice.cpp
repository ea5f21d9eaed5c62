#include "glx/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace glx {

Site::Site(std::initializer_list<std::int32_t> coords) {
    if (coords.size() > static_cast<std::size_t>(kMaxDim))
        throw std::invalid_argument("Site: dimension exceeds kMaxDim");
    d = static_cast<std::int32_t>(coords.size());
    int i = 0;
    for (auto c : coords) x[static_cast<std::size_t>(i++)] = c;
}

Site Site::origin(int dim) {
    Site s;
    s.d = dim;
    return s;
}

std::string Site::to_string() const {
    std::string out = "(";
    for (int i = 0; i < d; ++i) {
        if (i) out += ",";
        out += std::to_string(x[static_cast<std::size_t>(i)]);
    }
    return out + ")";
}

Site operator+(const Site& a, const Site& b) {
    Site r = a;
    for (int i = 0; i < a.d; ++i) r[i] += b[i];
    return r;
}

Site operator-(const Site& a, const Site& b) {
    Site r = a;
    for (int i = 0; i < a.d; ++i) r[i] -= b[i];
    return r;
}

double dist2(const Site& a, const Site& b) {
    double s = 0;
    for (int i = 0; i < a.d; ++i) {
        const double dx = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += dx * dx;
    }
    return s;
}

double norm2(const Site& a) { return dist2(a, Site::origin(a.d)); }

std::array<std::int32_t, kMaxDim> symmetry_key(const Site& offset) {
    std::array<std::int32_t, kMaxDim> key{};
    for (int i = 0; i < offset.d; ++i) key[static_cast<std::size_t>(i)] = std::abs(offset[i]);
    std::sort(key.begin(), key.begin() + offset.d, std::greater<>());
    return key;
}

BoxDomain::BoxDomain(int dim, int side, double bulk_delta) : d(dim), n(side), delta(bulk_delta) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("BoxDomain: d must be in [1, 8]");
    if (n < 1) throw std::invalid_argument("BoxDomain: n must be positive");
    if (delta < 0.0 || delta >= 0.5) throw std::invalid_argument("BoxDomain: delta must be in [0, 1/2)");
    volume_ = 1;
    for (int i = 0; i < d; ++i) {
        if (volume_ > std::numeric_limits<std::int64_t>::max() / n)
            throw std::overflow_error("BoxDomain: n^d exceeds index capacity");
        volume_ *= n;
    }
}

bool BoxDomain::contains(const Site& s) const {
    if (s.d != d) return false;
    for (int i = 0; i < d; ++i)
        if (s[i] < 0 || s[i] >= n) return false;
    return true;
}

std::int64_t BoxDomain::index_of(const Site& s) const {
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * n + s[i];
    return idx;
}

Site BoxDomain::site_at(std::int64_t index) const {
    Site s;
    s.d = d;
    for (int i = d - 1; i >= 0; --i) {
        s[i] = static_cast<std::int32_t>(index % n);
        index /= n;
    }
    return s;
}

double BoxDomain::exterior_distance(const Site& s) const {
    // The nearest exterior site differs in exactly one coordinate: pushing any
    // single coordinate just outside [0, n-1] is never farther than a
    // multi-coordinate move.
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        best = std::min(best, static_cast<double>(s[i] + 1));
        best = std::min(best, static_cast<double>(n - s[i]));
    }
    return best;
}

double BoxDomain::bulk_threshold() const {
    return delta * std::pow(static_cast<double>(volume_), 1.0 / d);
}

std::vector<Site> enumerate_box(int d, int n) {
    BoxDomain box(d, n);
    std::vector<Site> sites;
    sites.reserve(static_cast<std::size_t>(box.volume()));
    for (std::int64_t i = 0; i < box.volume(); ++i) sites.push_back(box.site_at(i));
    return sites;
}

std::vector<std::int64_t> bulk_indices(const BoxDomain& domain) {
    const double threshold = domain.bulk_threshold();
    std::vector<std::int64_t> out;
    for (std::int64_t i = 0; i < domain.volume(); ++i) {
        if (domain.exterior_distance(domain.site_at(i)) > threshold) out.push_back(i);
    }
    return out;
}

std::vector<Site> bulk_sites(const BoxDomain& domain) {
    std::vector<Site> out;
    for (auto i : bulk_indices(domain)) out.push_back(domain.site_at(i));
    return out;
}

std::vector<Site> ball_sites(const Site& center, double radius, const BoxDomain& domain) {
    std::vector<Site> out;
    if (radius < 0) return out;
    const int r = static_cast<int>(std::floor(radius));
    const double r2 = radius * radius;
    Site s = center;
    // iterate the bounding cube clipped to the box
    std::array<int, kMaxDim> lo{}, hi{};
    for (int i = 0; i < domain.d; ++i) {
        lo[static_cast<std::size_t>(i)] = std::max(0, center[i] - r);
        hi[static_cast<std::size_t>(i)] = std::min(domain.n - 1, center[i] + r);
        if (lo[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)]) return out;
        s[i] = lo[static_cast<std::size_t>(i)];
    }
    while (true) {
        if (dist2(s, center) <= r2 + 1e-12) out.push_back(s);
        int i = domain.d - 1;
        while (i >= 0 && s[i] == hi[static_cast<std::size_t>(i)]) {
            s[i] = lo[static_cast<std::size_t>(i)];
            --i;
        }
        if (i < 0) break;
        ++s[i];
    }
    return out;
}

std::vector<Site> ball_sites_free(const Site& center, double radius, int d) {
    std::vector<Site> out;
    if (radius < 0) return out;
    const int r = static_cast<int>(std::floor(radius));
    const double r2 = radius * radius;
    Site s = center;
    for (int i = 0; i < d; ++i) s[i] = center[i] - r;
    while (true) {
        if (dist2(s, center) <= r2 + 1e-12) out.push_back(s);
        int i = d - 1;
        while (i >= 0 && s[i] == center[i] + r) {
            s[i] = center[i] - r;
            --i;
        }
        if (i < 0) break;
        ++s[i];
    }
    return out;
}

std::vector<Site> outer_boundary2(const BoxDomain& domain) {
    // Exterior sites within distance 2 live in the cube [-2, n+1]^d.
    std::vector<Site> out;
    Site s;
    s.d = domain.d;
    for (int i = 0; i < domain.d; ++i) s[i] = -2;
    while (true) {
        if (!domain.contains(s)) {
            // nearest box site coordinatewise clamp
            double d2 = 0;
            for (int i = 0; i < domain.d; ++i) {
                const int c = std::clamp(s[i], 0, domain.n - 1);
                const double dx = s[i] - c;
                d2 += dx * dx;
            }
            if (d2 <= 4.0 + 1e-12) out.push_back(s);
        }
        int i = domain.d - 1;
        while (i >= 0 && s[i] == domain.n + 1) {
            s[i] = -2;
            --i;
        }
        if (i < 0) break;
        ++s[i];
    }
    return out;
}

}  // namespace glx
