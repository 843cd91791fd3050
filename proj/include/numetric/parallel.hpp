#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace numetric {

/// Runs fn(i) for i in [0, n). With parallel set, work is split into
/// contiguous chunks across hardware threads; every fn(i) writes only to
/// slot i of preallocated storage, and all reductions happen afterwards in
/// index order, so results are identical with and without parallelism.
inline void for_index(int n, bool parallel, const std::function<void(int)>& fn) {
  if (!parallel || n < 256) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw < 2) hw = 2;
  const int chunks = static_cast<int>(hw);
  std::vector<std::thread> workers;
  workers.reserve(chunks);
  for (int c = 0; c < chunks; ++c) {
    const int lo = static_cast<int>(static_cast<long>(n) * c / chunks);
    const int hi = static_cast<int>(static_cast<long>(n) * (c + 1) / chunks);
    workers.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace numetric
