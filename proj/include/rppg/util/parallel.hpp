#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rppg::util {

// Applies fn to every index in [0, n) using up to `threads` workers.
// Each index is processed exactly once and writes only to its own output
// slot in the callers we use, so results do not depend on the thread count
// or on scheduling. threads <= 1 runs inline.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers = threads <= 1 ? 1 : static_cast<std::size_t>(threads);
  if (workers > n) workers = n;
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::mutex err_mutex;
  std::exception_ptr first_error;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rppg::util
