#pragma once

#include <cstddef>
#include <functional>

namespace ebench::parallel {

/// Worker count: EBENCH_THREADS when set and positive, else hardware concurrency.
int thread_count();

/// Runs body(begin, end) over a static partition of [0, n). Each index is
/// processed by exactly one worker, so per-index results do not depend on the
/// thread count.
void for_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                std::size_t min_chunk = 16);

}  // namespace ebench::parallel
