#pragma once

#include <cstddef>
#include <functional>

namespace skdv {

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
// Indices are handed out dynamically; results must be written to per-index slots.
// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

int resolve_threads(int threads);

}  // namespace skdv
