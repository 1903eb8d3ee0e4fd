#pragma once

#include <cstddef>
#include <functional>

namespace hrdd {

// Runs body(i) for i in [0, n) across up to n_threads workers.  Callers must
// write results into per-index slots so the outcome is identical for any
// thread count; the first exception (lowest index) is rethrown after all
// workers join.
void parallel_for(std::size_t n, int n_threads,
                  const std::function<void(std::size_t)>& body);

int default_thread_count();

}  // namespace hrdd
