#pragma once

#include <cstddef>
#include <functional>

namespace crcal {

// Process-wide worker count used by parallel_for. 0 selects hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

// Runs fn(i) for every i in [0, n). Each index is handled exactly once; callers
// write results into per-index slots so output never depends on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace crcal
