#ifndef HANLE_PARALLEL_HPP
#define HANLE_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace hanle {

// Number of worker threads: HANLE_THREADS env var when set (>= 1), otherwise
// hardware concurrency.
unsigned thread_count();

// Runs fn(i) for i in [0, n). Work items must be independent; results must
// not depend on execution order. Falls back to a plain loop for small n or
// a single worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hanle

#endif
