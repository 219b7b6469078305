#pragma once

#include <cstddef>
#include <functional>

namespace dipsmc::par {

/// Number of worker threads: DIPOLE_ASMC_THREADS if set (clamped to [1, 256]),
/// otherwise std::thread::hardware_concurrency().
int worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads.
///
/// Work is split into contiguous index blocks.  Callers must make fn(i)
/// write only to slot i state; under that contract results are identical
/// for every worker count, including 1.  Exceptions thrown by fn are
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dipsmc::par
