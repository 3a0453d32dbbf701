#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace nilspace {

// Worker count from NILSPACE_THREADS, else hardware concurrency (at most 8).
inline unsigned thread_count() {
    if (const char* env = std::getenv("NILSPACE_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return std::clamp(hw, 1u, 8u);
}

// Runs fn(i) for i in [0, n) over contiguous chunks. Callers write results
// into per-index slots and reduce afterwards in index order.
template <class Fn>
void parallel_for(std::uint64_t n, Fn&& fn, std::uint64_t min_per_thread = 64) {
    unsigned workers = thread_count();
    if (workers <= 1 || n < 2 * min_per_thread) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n / min_per_thread));
    std::vector<std::thread> pool;
    std::uint64_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::uint64_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::uint64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace nilspace
