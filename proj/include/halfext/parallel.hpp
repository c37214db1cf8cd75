#pragma once

#include <cstddef>
#include <functional>

namespace halfext {

/// Upper bound on worker threads used by parallel_for. 0 means
/// std::thread::hardware_concurrency().
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(i) for i in [0, count). Work is split into contiguous chunks;
/// each index is processed by exactly one thread, so results written per
/// index are independent of the thread count. Nested calls run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace halfext
