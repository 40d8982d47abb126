#ifndef HEAVYTAIL_PARALLEL_HPP
#define HEAVYTAIL_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace heavytail {

// Parallel map over [0, n): workers pull indices from a shared counter, the
// body writes to its own slot, so results are independent of worker count.
inline void parallel_for(long long n, int threads,
                         const std::function<void(long long)>& body) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (long long i = 0; i < n; ++i) body(i);
    return;
  }
  int workers = static_cast<int>(std::min<long long>(threads, n));
  std::atomic<long long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int k = 0; k < workers; ++k) {
    pool.emplace_back([&]() {
      while (!failed.load(std::memory_order_relaxed)) {
        long long i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Effective worker count: explicit request wins, otherwise the hardware
// count, both capped by the HEAVYTAIL_THREADS environment variable.
int resolve_threads(int requested);

}  // namespace heavytail

#endif
