#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace pflow {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

/// Runs fn(begin, end) over [0, n) split into a fixed chunk grid.
///
/// The chunk grid does not depend on the thread count, so reductions that
/// combine per-chunk partials in chunk order stay deterministic under any
/// --threads setting. The first exception thrown by a worker is rethrown.
inline void parallel_for_chunks(
    std::size_t n, int threads,
    const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const int nt = resolve_threads(threads);
  const std::size_t chunks = std::min<std::size_t>(n, 256);
  if (nt <= 1 || chunks == 1) {
    fn(0, n);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks || failed.load()) return;
      std::size_t b = c * n / chunks;
      std::size_t e = (c + 1) * n / chunks;
      try {
        fn(b, e);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt) - 1);
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failed.load() && err) std::rethrow_exception(err);
}

/// Element-wise form: body(i) for i in [0, n).
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& body) {
  parallel_for_chunks(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) body(i);
  });
}

}  // namespace pflow
