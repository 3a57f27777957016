#pragma once

#include <functional>

namespace disco {

// Worker count: DISCO_THREADS when set and positive, else the hardware count.
int thread_count();

// Runs fn(0..n-1) over a small pool. Each index must write only its own slot;
// callers combine results in index order, which keeps output deterministic.
// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

}  // namespace disco
