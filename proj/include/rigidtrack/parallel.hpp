#pragma once

#include <cstddef>
#include <functional>

namespace rigidtrack {

// Runs body(i) for i in [0, count) across `workers` threads. Each index is
// claimed exactly once via an atomic counter, so results written to
// preallocated per-index slots are identical for any worker count. The first
// exception thrown by any body is rethrown on the caller thread after all
// workers join. workers <= 1 runs inline.
void parallel_for(size_t count, int workers,
                  const std::function<void(size_t)>& body);

}  // namespace rigidtrack
