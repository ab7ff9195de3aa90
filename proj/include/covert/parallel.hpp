// SPDX-License-Identifier: Apache-2.0
#pragma once

// Trial-level parallelism helper. Work items are indexed and every item draws
// from its own counter-RNG stream, so partitioning does not affect results.
// COVERT_THREADS caps the worker count.

#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace covert {

inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("COVERT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
    }
    return hw;
}

/// Runs fn(begin, end) over a static partition of [0, n).
template <class Fn>
void parallel_for(std::uint64_t n, Fn&& fn) {
    const unsigned workers = worker_count();
    if (workers <= 1 || n < 2) {
        fn(std::uint64_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::uint64_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t b = w * chunk;
        const std::uint64_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace covert
