#pragma once

#include <cstddef>
#include <functional>

namespace wand {

/// Worker-thread cap: WAND_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t worker_threads();

/// Calls body(k) for k in [0, count) on up to `threads` threads. Work is
/// handed out by index, so any per-index determinism in `body` carries over.
/// The first exception thrown by a body is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace wand
