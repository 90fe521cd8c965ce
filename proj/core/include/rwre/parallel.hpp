#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rwre {

// Worker count for a requested job count; <= 0 means all hardware threads.
inline unsigned resolve_jobs(int jobs) {
  if (jobs > 0) return static_cast<unsigned>(jobs);
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on up to `jobs` threads. Callers write results by
// index, so output does not depend on the schedule. The exception of the lowest
// failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& body) {
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(resolve_jobs(jobs), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rwre
