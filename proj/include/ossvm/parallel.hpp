#pragma once

#include <cstddef>
#include <functional>

namespace ossvm {

// Worker count: OPENSET_SVM_THREADS if set to a positive integer, else the
// hardware concurrency (at least 1).
std::size_t thread_count();

// Runs fn(0..n-1) on up to thread_count() threads. Calls made from inside a
// worker run inline, so nesting never oversubscribes. If any call throws, the
// exception from the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ossvm
