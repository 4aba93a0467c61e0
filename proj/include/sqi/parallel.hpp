#pragma once

#include <cstddef>
#include <functional>

namespace sqi {

// Runs body(i) for every i in [0, count) on up to `jobs` threads (0 means
// hardware concurrency). Work items must be independent; callers keep
// results indexed by i so aggregation order does not depend on
// scheduling. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body);

std::size_t resolve_jobs(std::size_t jobs);

}  // namespace sqi
