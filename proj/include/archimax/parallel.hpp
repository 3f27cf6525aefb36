#pragma once

#include <cstddef>
#include <functional>

namespace archimax {

/// Process-wide worker count used by the pure, index-parallel loops
/// (metrics, block-size calibration). Results never depend on it.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Calls body(i) for i in [0, n); chunks are contiguous per worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace archimax
