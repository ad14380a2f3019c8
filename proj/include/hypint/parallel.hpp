#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace hypint {

inline unsigned hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Runs fn(b) for every block index; work is claimed dynamically but each
// block's result must be stored by index so reductions stay order-fixed.
inline void parallel_blocks(int n_blocks, const std::function<void(int)>& fn) {
    const unsigned workers = std::min<unsigned>(hardware_threads(), n_blocks);
    if (workers <= 1) {
        for (int b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const int b = next.fetch_add(1);
                if (b >= n_blocks) return;
                fn(b);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace hypint
