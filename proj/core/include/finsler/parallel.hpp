#pragma once

#include <functional>

#include "finsler/types.hpp"

namespace finsler {

/// Thread count to use: FINSLER_THREADS when set to a positive integer,
/// otherwise `requested` (at least 1).
int resolve_threads(int requested);

/// Splits [0, n) into contiguous blocks, one per worker, and calls
/// body(begin, end) on each. Runs inline when threads <= 1.
void parallel_for(Index n, int threads, const std::function<void(Index, Index)>& body);

}  // namespace finsler
