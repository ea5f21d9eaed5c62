#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace glx {

inline constexpr int kMaxDim = 8;

// Lattice site in Z^d, d <= kMaxDim. Unused coordinates stay zero so that
// equality and hashing work uniformly.
struct Site {
    std::array<std::int32_t, kMaxDim> x{};
    std::int32_t d = 0;

    Site() = default;
    Site(std::initializer_list<std::int32_t> coords);
    static Site origin(int dim);

    std::int32_t operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
    std::int32_t& operator[](int i) { return x[static_cast<std::size_t>(i)]; }

    friend bool operator==(const Site& a, const Site& b) { return a.d == b.d && a.x == b.x; }
    friend auto operator<=>(const Site& a, const Site& b) = default;

    std::string to_string() const;
};

Site operator+(const Site& a, const Site& b);
Site operator-(const Site& a, const Site& b);

// Squared Euclidean norm of a - b. The artifact fixes the l2 norm throughout
// (recorded in run metadata).
double dist2(const Site& a, const Site& b);
double norm2(const Site& a);

// Canonical symmetry key: absolute coordinates sorted descending. Two offsets
// share a key iff they are related by coordinate permutations and sign flips.
std::array<std::int32_t, kMaxDim> symmetry_key(const Site& offset);

// The box V_N = [0, n-1]^d with its bulk parameter delta and the row-major
// site index (first coordinate slowest). The index order is a stable contract
// used by all CSV outputs.
struct BoxDomain {
    int d = 1;
    int n = 1;
    double delta = 0.0;

    BoxDomain() = default;
    BoxDomain(int dim, int side, double bulk_delta = 0.0);

    std::int64_t volume() const { return volume_; }
    bool contains(const Site& s) const;
    std::int64_t index_of(const Site& s) const;
    Site site_at(std::int64_t index) const;

    // Euclidean distance from s to the nearest site of Z^d \ V_N.
    double exterior_distance(const Site& s) const;

    // Threshold delta * N^{1/d} defining the bulk.
    double bulk_threshold() const;

  private:
    std::int64_t volume_ = 1;
};

// All n^d sites in row-major order.
std::vector<Site> enumerate_box(int d, int n);

// Sites of the box strictly farther than delta*N^{1/d} from every exterior
// site. delta = 0 gives the whole box.
std::vector<Site> bulk_sites(const BoxDomain& domain);
std::vector<std::int64_t> bulk_indices(const BoxDomain& domain);

// {beta in V_N : |beta - center| <= radius}, Euclidean.
std::vector<Site> ball_sites(const Site& center, double radius, const BoxDomain& domain);

// Ball in Z^d without box clipping (used for infinite-volume conditioning).
std::vector<Site> ball_sites_free(const Site& center, double radius, int d);

// Exterior sites within Euclidean distance 2 of the box.
std::vector<Site> outer_boundary2(const BoxDomain& domain);

}  // namespace glx
