#pragma once

#include <cstdint>
#include <functional>

namespace socgcf {

// Worker cap: min(hardware threads, SOCGCF_THREADS when set). Always >= 1.
int max_threads();

// Runs fn(begin, end) over a fixed partition of [0, n). Chunks are disjoint,
// so writes to per-index slots stay deterministic regardless of scheduling.
// Callers must not reduce across chunks inside fn.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace socgcf
