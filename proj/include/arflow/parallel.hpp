#pragma once

#include <functional>

namespace arflow {

/// Worker cap from ARFLOW_THREADS (default: hardware concurrency, at least 1).
int worker_count();

/// Runs body(i) for i in [0, n). Each index runs exactly once; callers write
/// results into per-index slots and reduce in index order afterwards.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace arflow
