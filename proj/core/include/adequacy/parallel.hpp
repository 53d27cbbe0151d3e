#pragma once

#include <cstddef>
#include <functional>

namespace adequacy {

/// Worker count: ADEQUACY_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
[[nodiscard]] std::size_t thread_count();

/// Calls `body(i)` for every i in [0, n), split into contiguous chunks over at
/// most `thread_count()` threads. Each index is visited exactly once, so bodies
/// that only write slot i produce results independent of the thread count.
/// The first exception thrown by any body is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace adequacy
