#ifndef IDIOMSPACE_TOOLS_WORKER_POOL_HPP
#define IDIOMSPACE_TOOLS_WORKER_POOL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace idiomspace::cli {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results land at their
// index, so the output order never depends on scheduling. After the first
// exception no new units start; the exception is rethrown once every worker
// has stopped, and `done` still holds the units that finished.
template <class T, class Fn>
std::vector<std::optional<T>> parallel_map(std::size_t n, std::size_t jobs, Fn&& fn,
                                           std::exception_ptr* failure = nullptr) {
  std::vector<std::optional<T>> done(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        done[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) {
    if (failure) {
      *failure = error;
    } else {
      std::rethrow_exception(error);
    }
  }
  return done;
}

}  // namespace idiomspace::cli

#endif  // IDIOMSPACE_TOOLS_WORKER_POOL_HPP
