#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace mhdg {

/// Runs fn(i) for i in [0, n) on up to `threads` workers with static contiguous chunks.
/// The first exception thrown by any worker is rethrown on the caller.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const int lo = static_cast<int>(static_cast<long>(n) * t / threads);
      const int hi = static_cast<int>(static_cast<long>(n) * (t + 1) / threads);
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mhdg
