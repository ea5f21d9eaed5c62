#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace glx {

// Deterministic chunked parallelism: the chunk grid depends only on
// (n_items, chunk_size), never on the worker count; workers pull chunks from
// an atomic counter and the body writes only into its chunk's slots, so
// results are bit-identical for any number of workers.
inline void parallel_for_chunks(std::int64_t n_items, std::int64_t chunk_size, int workers,
                                const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& body) {
    if (n_items <= 0) return;
    if (chunk_size <= 0) chunk_size = 1;
    const std::int64_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
    if (workers <= 1 || n_chunks == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c)
            body(c * chunk_size, std::min(n_items, (c + 1) * chunk_size), c);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            try {
                body(c * chunk_size, std::min(n_items, (c + 1) * chunk_size), c);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = static_cast<int>(std::min<std::int64_t>(workers, n_chunks));
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Fixed-order tree-free reduction: per-chunk partials combined sequentially
// in chunk order, so sums do not depend on the worker count.
template <typename T, typename MapFn, typename CombineFn>
T parallel_map_reduce(std::int64_t n_items, std::int64_t chunk_size, int workers, T init,
                      MapFn&& map_chunk, CombineFn&& combine) {
    if (n_items <= 0) return init;
    if (chunk_size <= 0) chunk_size = 1;
    const std::int64_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
    std::vector<T> partial(static_cast<std::size_t>(n_chunks), init);
    parallel_for_chunks(n_items, chunk_size, workers,
                        [&](std::int64_t b, std::int64_t e, std::int64_t c) {
                            partial[static_cast<std::size_t>(c)] = map_chunk(b, e);
                        });
    T acc = init;
    for (const auto& p : partial) acc = combine(acc, p);
    return acc;
}

}  // namespace glx
