#pragma once

#include <functional>

namespace pushbroom {

/// Process-wide worker count for parallel_for. 0 means auto (hardware
/// concurrency). Outputs never depend on this value: parallel loops write
/// disjoint rows.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [begin, end), possibly on several threads in
/// contiguous chunks. The first exception thrown by a body is rethrown
/// after all workers join.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace pushbroom
