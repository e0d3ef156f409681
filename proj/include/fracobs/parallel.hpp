#pragma once

#include <functional>

namespace fracobs {

/// Process-wide worker count used by assembly loops (default 1).
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() workers.
/// Callers write to per-index slots and reduce afterwards in index order,
/// which keeps results identical for every thread count.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace fracobs
