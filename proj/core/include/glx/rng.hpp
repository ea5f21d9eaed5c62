#pragma once

#include <cstdint>

namespace glx {

// Counter-based per-replicate stream: the state is derived only from
// (seed, stream), so replicates are independent of scheduling and worker
// count. splitmix64 output function; Box-Muller normals, bit-reproducible
// across platforms (no libm distribution objects).
class ReplicateRng {
  public:
    ReplicateRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();  // (0, 1)
    double normal();

  private:
    std::uint64_t state_;
    double spare_ = 0;
    bool has_spare_ = false;
};

}  // namespace glx
