#pragma once

#include <cstddef>
#include <functional>

namespace tradeslab {

// Parallelism cap: LAB_THREADS when set, otherwise min(4, hardware).
std::size_t max_threads();

// Runs fn(i) for i in [0, n). Work items must be independent and write to
// disjoint slots; results are therefore identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tradeslab
