// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace smn {

/// Runs body(begin, end) over disjoint chunks of [begin, end), possibly on
/// several threads. Every index is processed exactly once and each chunk is
/// processed sequentially, so results are bit-identical regardless of thread
/// count or scheduling.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t grain = 16384);

/// Worker count currently in use (>= 1). Initialized from SMN_THREADS or
/// hardware concurrency.
int num_threads();

/// Overrides the worker count for subsequent parallel_for calls.
void set_num_threads(int n);

}  // namespace smn
