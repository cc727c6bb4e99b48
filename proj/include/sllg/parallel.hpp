#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace sllg {

inline constexpr const char* kWorkersEnv = "SLLG_WORKERS";

/// Worker count from SLLG_WORKERS; 1 when unset or unparsable.
inline std::size_t worker_count_from_env() {
  const char* s = std::getenv(kWorkersEnv);
  if (!s) return 1;
  try {
    const long v = std::stol(s);
    return v >= 1 ? static_cast<std::size_t>(v) : 1;
  } catch (...) {
    return 1;
  }
}

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Work items are claimed
/// dynamically; callers write results by index, so the outcome does not depend on the
/// worker count. The first exception thrown by any item is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  parallel_for(n, worker_count_from_env(), std::forward<Fn>(fn));
}

}  // namespace sllg
