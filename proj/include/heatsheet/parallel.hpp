#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace heatsheet {

// Runs fn(i) for i in [0, n) on `workers` threads. Work items must write only
// to their own slots; aggregation order is the caller's, so results do not
// depend on scheduling.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto drain = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  pool.reserve(count);
  for (int w = 0; w < count; ++w) pool.emplace_back(drain);
  for (std::thread& t : pool) t.join();
}

} // namespace heatsheet
