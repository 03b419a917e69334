// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace bitkv {

// Worker count: BITKV_THREADS if set (minimum 1), else hardware concurrency.
size_t thread_budget();

// Runs fn(0..n) across the thread budget. Work items must write to disjoint
// locations; results are then independent of the schedule.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace bitkv
