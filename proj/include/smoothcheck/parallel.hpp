#ifndef SMOOTHCHECK_PARALLEL_HPP
#define SMOOTHCHECK_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace smoothcheck {

/// Worker count: SMOOTHCHECK_THREADS if set, else hardware concurrency
/// capped at 8.
int worker_count();

/// Runs fn(i) for i in [0, count). Work items must be independent; callers
/// reduce results in index order afterwards so output does not depend on the
/// thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace smoothcheck

#endif
