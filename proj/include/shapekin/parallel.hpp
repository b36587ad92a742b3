#pragma once

// Minimal data-parallel index loop. Worker count comes from the hardware,
// capped by the SHAPEKIN_THREADS environment variable. Chunks are fixed by
// index order and writes are disjoint, so results do not depend on the
// worker count.

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace shapekin {

inline int worker_count() {
    static const int cached = [] {
        int n = static_cast<int>(std::thread::hardware_concurrency());
        if (n < 1) n = 1;
        if (const char* env = std::getenv("SHAPEKIN_THREADS")) {
            const int cap = std::atoi(env);
            if (cap >= 1) n = std::min(n, cap);
        }
        return n;
    }();
    return cached;
}

template <class Fn>
void parallel_for(std::ptrdiff_t count, Fn&& fn) {
    const int workers = std::min<std::ptrdiff_t>(worker_count(), std::max<std::ptrdiff_t>(count, 1));
    if (workers <= 1 || count < 1024) {
        for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::ptrdiff_t chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::ptrdiff_t lo = w * chunk;
        const std::ptrdiff_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::ptrdiff_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace shapekin
