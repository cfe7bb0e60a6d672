#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace fou {

/// Environment variable selecting the worker count.
inline constexpr const char* kWorkersEnv = "FOU_SHEET_WORKERS";

/// Worker count from FOU_SHEET_WORKERS, else the machine's hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads.
///
/// Indices are dealt round-robin; callers write results into slot i of a
/// pre-sized buffer and reduce afterwards in index order, so the outcome
/// never depends on scheduling. The first exception (lowest index) is
/// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int workers = worker_count());

}  // namespace fou
