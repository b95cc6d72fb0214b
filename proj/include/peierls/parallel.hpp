#pragma once

// Minimal fork-join helpers. Results are always collected by index, never by
// completion order, so reductions over them are deterministic.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace peierls {

/// Worker count: PEIERLS_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
inline unsigned default_threads() {
  if (const char* env = std::getenv("PEIERLS_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

template <class Body>
void run_workers(unsigned threads, Body&& body) {
  if (threads <= 1) {
    body(0u);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        body(w);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Runs fn(worker, workers) for every worker; the result vector is indexed by
/// worker.
template <class T, class Fn>
std::vector<T> parallel_partitions(unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  std::vector<T> out(threads);
  detail::run_workers(threads, [&](unsigned w) { out[w] = fn(w, threads); });
  return out;
}

/// Runs fn(task) for task in [0, count) on a pool of workers pulling tasks
/// from a shared counter; the result vector is indexed by task.
template <class T, class Fn>
std::vector<T> parallel_tasks(unsigned threads, std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  std::atomic<std::size_t> next{0};
  const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1)));
  detail::run_workers(workers, [&](unsigned) {
    for (std::size_t t = next++; t < count; t = next++) out[t] = fn(t);
  });
  return out;
}

}  // namespace peierls
