#pragma once

#include <cstddef>
#include <functional>

namespace nlpb {

/// Worker count used by node loops and concurrent study runs (default 1).
void set_num_threads(int n);
int num_threads();

/// Calls body(begin, end) over contiguous chunks of [0, n). Chunks are
/// disjoint, so per-node writes give identical results for any thread count.
/// Runs inline when one thread is configured or `work` is small.
void parallel_for(std::size_t n, std::size_t work, const std::function<void(std::size_t, std::size_t)>& body);

/// Runs task(i) for i in [0, n), concurrently when more than one thread is configured.
void parallel_tasks(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace nlpb
