#pragma once

#include <cstddef>
#include <functional>

namespace mgt {

// Worker cap; initialised from MGT_LAB_THREADS, defaults to hardware concurrency.
int max_threads();
void set_max_threads(int n);

// Runs body(begin, end) over contiguous chunks; results must not depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Runs body(i) for i in [0, n) on up to `jobs` threads; the first exception is rethrown.
void run_jobs(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace mgt
