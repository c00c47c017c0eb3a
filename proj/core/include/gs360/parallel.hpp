// Copyright Contributors to the geosplat360 Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace gs360 {

inline int resolve_threads(int threads) {
  if (threads > 0)
    return threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(chunk_index, begin, end) over [0, n) split into static contiguous
/// chunks, one per worker. Chunk boundaries depend only on (n, threads), so a
/// caller that merges per-chunk results in chunk order gets a deterministic
/// reduction for a fixed thread count.
inline void parallel_chunks(long n, int threads,
                            const std::function<void(int, long, long)> &fn) {
  int workers = std::min<long>(resolve_threads(threads), std::max<long>(n, 1));
  if (workers <= 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  long chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    long begin = w * chunk;
    long end = std::min(n, begin + chunk);
    if (begin >= end)
      break;
    pool.emplace_back(fn, w, begin, end);
  }
  for (auto &t : pool)
    t.join();
}

} // namespace gs360
