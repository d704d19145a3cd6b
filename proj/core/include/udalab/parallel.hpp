#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace udalab::parallel {

/// Worker count: UDA_LAB_THREADS when set and positive, otherwise the number
/// of logical cores (at least 1).
int worker_count();

/// Runs fn(0..n-1) on a bounded pool. Tasks pull indices from a shared atomic
/// counter, so results must be written to per-index slots; ordering of
/// side effects is then deterministic regardless of scheduling. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

}  // namespace udalab::parallel
