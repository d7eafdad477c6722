#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pinspect {

// Runs fn(begin..end) split into contiguous chunks across worker threads.
// Chunk boundaries depend only on (begin, end, chunk), not on thread count,
// so any reduction done per chunk is reproducible.
inline void parallel_for(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t, std::size_t)>& fn,
                         std::size_t chunk = 0) {
  const std::size_t n = end > begin ? end - begin : 0;
  if (n == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (chunk == 0) chunk = std::max<std::size_t>(1, n / (4 * hw));
  if (hw == 1 || n <= chunk) {
    fn(begin, end);
    return;
  }
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t lo = begin; lo < end; lo += chunk)
    ranges.emplace_back(lo, std::min(end, lo + chunk));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= ranges.size()) return;
      fn(ranges[i].first, ranges[i].second);
    }
  };
  std::vector<std::thread> pool;
  const unsigned nthreads = std::min<std::size_t>(hw, ranges.size());
  pool.reserve(nthreads);
  for (unsigned i = 0; i + 1 < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace pinspect
