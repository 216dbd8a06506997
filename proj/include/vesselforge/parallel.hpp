#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace vesselforge {

// Thread cap from VESSELFORGE_THREADS, else hardware concurrency (>= 1).
unsigned configured_threads();

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items are handed
// out dynamically; fn must only write state owned by item i. The first
// exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace vesselforge
