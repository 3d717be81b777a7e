#pragma once

#include <cstddef>
#include <functional>

namespace vortex {

// Worker count: VORTEX_NUM_WORKERS if set and positive, otherwise the
// hardware concurrency.
int default_workers();

// Runs fn(0..n-1) on up to `workers` threads. Each index runs exactly once;
// callers merge results by index so output does not depend on scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace vortex
