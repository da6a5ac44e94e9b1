#pragma once

#include <functional>

namespace spde {

// Runs body(i) for i in [0, n) on up to `threads` workers.  Work items must
// write only into their own per-index slots; any aggregation then happens in
// index order afterwards, so results are independent of scheduling and of
// the worker count.  threads <= 1 runs inline.
void parallel_for(long n, int threads, const std::function<void(long)>& body);

}  // namespace spde
