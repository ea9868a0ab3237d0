#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace schonmann {

// --workers fallback: SCHONMANN_LAB_WORKERS, then hardware concurrency.
unsigned default_worker_count();

struct EstimatorOptions;  // fwd (ising.hpp owns SamplerOptions)

// Runs fn(i) for i in [0, count).  Results are stored by task index and
// callers reduce them in index order, so output never depends on thread
// scheduling or worker count.
template <typename T, typename Fn>
std::vector<T> parallel_map(size_t count, unsigned workers, Fn&& fn) {
  std::vector<T> results(count);
  if (count == 0) return results;
  if (workers < 1) workers = 1;
  if (workers > count) workers = static_cast<unsigned>(count);

  if (workers == 1) {
    for (size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }

  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto body = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);  // drain remaining work
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace schonmann
