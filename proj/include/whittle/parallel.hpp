#ifndef WHITTLE_PARALLEL_HPP
#define WHITTLE_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace whittle {

/// Thread count from WHITTLE_THREADS, else the hardware concurrency.
inline int default_threads() {
  if (const char* env = std::getenv("WHITTLE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(0..n-1) across `threads` workers; order of execution is
/// unspecified, so fn must write to disjoint slots.
inline void parallel_for(Eigen::Index n, int threads,
                         const std::function<void(Eigen::Index)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  auto worker = [&] {
    for (Eigen::Index i = next.fetch_add(1); i < n; i = next.fetch_add(1))
      fn(i);
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<Eigen::Index>(threads, n));
  pool.reserve(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace whittle

#endif
