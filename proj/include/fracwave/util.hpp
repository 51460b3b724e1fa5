#pragma once

#include <charconv>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace fracwave {

/// Worker cap: value of FRACWAVE_THREADS if set and positive, else the
/// hardware concurrency (at least 1).
inline unsigned worker_count() {
    if (const char* env = std::getenv("FRACWAVE_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

/// Runs body(i) for i in [0, n).  Iterations must be independent; results must
/// be written to disjoint slots so the schedule cannot affect output bytes.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Shortest round-trip decimal form of a double (used by all CSV writers so
/// output is byte-stable).
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

}  // namespace fracwave
