// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>

namespace avguard {

// Worker cap: AVGUARD_NUM_WORKERS if set, else hardware concurrency; >= 1.
int worker_count();

// Runs fn(i) for i in [0, n) on a static partition of worker threads.
// Deterministic: each index is processed exactly once; fn must write only
// to index-owned state.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace avguard
