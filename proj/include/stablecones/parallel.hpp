#ifndef STABLECONES_PARALLEL_HPP
#define STABLECONES_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace stablecones {

/// Runs fn(block_index, begin, end) over [0, n) split into fixed blocks.
/// Blocks are claimed dynamically but identified by index, so any
/// per-block results live at a scheduling-independent slot; reducing them
/// in index order makes the outcome a pure function of the partition.
inline void parallel_for_blocks(std::int64_t n, std::int64_t block_size, int workers,
                                const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
    const std::int64_t n_blocks = (n + block_size - 1) / block_size;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 1 || n_blocks <= 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b)
            fn(b, b * block_size, std::min(n, (b + 1) * block_size));
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            fn(b, b * block_size, std::min(n, (b + 1) * block_size));
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace stablecones

#endif
