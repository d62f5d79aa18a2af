// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace gpamr {

/// Static contiguous partition of [0,n) over `threads` workers. Chunk
/// boundaries depend only on (n, threads), so per-chunk reductions merged
/// in chunk order are deterministic for a fixed thread count.
template <class Fn>
void parallel_chunks(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    if (n > 0) fn(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  const int base = n / threads, rem = n % threads;
  int begin = 0;
  for (int t = 0; t < threads; ++t) {
    const int end = begin + base + (t < rem ? 1 : 0);
    pool.emplace_back([&fn, t, begin, end] { fn(t, begin, end); });
    begin = end;
  }
  for (auto& th : pool) th.join();
}

}  // namespace gpamr
