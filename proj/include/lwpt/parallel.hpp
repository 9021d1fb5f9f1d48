#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace lwpt {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index owns its
// output slot, so results are identical to a serial loop regardless of the
// thread count; any reduction must happen afterwards in index order.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace lwpt
