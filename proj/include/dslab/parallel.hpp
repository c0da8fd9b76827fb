#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace dslab {

/// DSLAB_WORKERS if set and positive, else the hardware thread count.
inline unsigned default_workers() {
  if (const char* env = std::getenv("DSLAB_WORKERS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
    } catch (const std::exception&) {
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, count) on up to `workers` threads. Results must be
/// written by index, so the schedule never shows up in the output. If several
/// indices throw, the exception from the lowest index is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  if (count == 0) return;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(count, 1024))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned k = 1; k < workers; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failed) {
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
}

}  // namespace dslab
