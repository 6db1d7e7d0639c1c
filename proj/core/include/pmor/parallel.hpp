#pragma once

#include <cstddef>
#include <functional>

namespace pmor {

/// Worker count: hardware concurrency, capped by the PMOR_THREADS environment
/// variable when it holds a positive integer.
std::size_t worker_count();

/// Calls fn(i) for i in [0, count). Results must be written to per-index
/// slots so the outcome does not depend on scheduling. If several calls
/// throw, the exception from the lowest index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace pmor
