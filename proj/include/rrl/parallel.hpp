#pragma once

#include <cstddef>
#include <functional>

namespace rrl::par {

// Worker count: RELU_RATE_LAB_THREADS if set and > 0, hardware concurrency
// when unset or 0.
int worker_count();

// Runs fn(0..count-1) across workers. Callers must write results into
// per-index slots; completion order is unspecified.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace rrl::par
