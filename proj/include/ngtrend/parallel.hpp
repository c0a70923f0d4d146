#pragma once

#include <cstddef>
#include <functional>

namespace ngtrend {

/// Worker count: hardware concurrency, capped by NGTREND_THREADS when set.
std::size_t thread_cap();

/// Runs body(i) for i in [0, count) on up to thread_cap() threads. Results
/// must be written to per-index slots; the body must not throw.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace ngtrend
