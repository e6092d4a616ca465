#pragma once

// Deterministic parallel map: items are computed independently and written
// to their own slots, so the result is identical for any thread count.

#include <thread>
#include <vector>

namespace blochpert {

template <typename Fn>
inline void parallel_for(long long n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (long long i = 0; i < n; ++i) fn(i);
    return;
  }
  int nt = std::min<long long>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w]() {
      for (long long i = w; i < n; i += nt) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace blochpert
