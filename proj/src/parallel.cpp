#include "archimax/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace archimax {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned threads) { g_threads = std::max(1u, threads); }

unsigned thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(g_threads, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        pool.emplace_back([&body, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace archimax
