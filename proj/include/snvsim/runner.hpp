#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace snvsim {

// Runs fn(block_index) for block_index in [0, n_blocks) across n_workers
// threads. Blocks are the unit of determinism: each owns its RNG stream(s)
// and writes to its own slice of preallocated output, so results do not
// depend on the worker count or scheduling.
inline void run_blocks(std::int64_t n_blocks, int n_workers,
                       const std::function<void(std::int64_t)>& fn) {
    if (n_workers <= 1 || n_blocks <= 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            fn(b);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<std::int64_t>(n_workers, n_blocks);
    pool.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace snvsim
