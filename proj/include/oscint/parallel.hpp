#pragma once
#include <cstddef>
#include <functional>

namespace oscint {

// 0 means hardware concurrency
void set_num_threads(int n);
int num_threads();

// Runs body(i) for i in [begin,end) split into contiguous chunks. Each index is
// handled by exactly one thread, so per-index results do not depend on scheduling.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}
