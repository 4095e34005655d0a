#pragma once

/// @file parallel.hpp
/// @brief Tiny index-space worker pool.
///
/// Work items must write to disjoint slots addressed by index; results are
/// then independent of thread count and scheduling.

#include <cstddef>
#include <thread>
#include <vector>

namespace whpa {

/// Run fn(i) for i in [0, n). `threads` 0 means hardware concurrency.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (threads > n) threads = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([t, threads, n, &fn] {
            // Static stripe partition keeps assignment deterministic.
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace whpa
