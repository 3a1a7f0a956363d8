#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cone {

// Runs fn(i) for i in [0, n) on at most `limit` threads. Results must be
// written by index, so the outcome never depends on completion order. The
// first exception thrown by any task is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t limit, Fn&& fn) {
  const std::size_t workers = std::min(n, std::max<std::size_t>(limit, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!failed.load(std::memory_order_relaxed)) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cone
