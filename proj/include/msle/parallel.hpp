#pragma once

#include <cstddef>
#include <functional>

namespace msle {

// Worker count: MSLE_WORKERS if set, else hardware concurrency.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) across workers. Each index is processed exactly
// once; results must go into per-index slots so that the outcome is
// independent of scheduling. Exceptions are captured and rethrown once.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace msle
