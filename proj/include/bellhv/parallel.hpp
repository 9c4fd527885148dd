#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bellhv {

// Worker cap from BELL_HV_LAB_THREADS (0 or unset = hardware concurrency).
inline unsigned worker_cap() {
  if (const char* env = std::getenv("BELL_HV_LAB_THREADS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return v > 1024 ? 1024u : static_cast<unsigned>(v);
    }
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1u;
}

namespace detail {
inline bool& in_parallel_region() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

// Runs fn(i) for i in [0, count). Each index must write only its own output
// slot, which keeps results independent of scheduling. Nested calls run
// inline on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(worker_cap(), count ? count : 1);
  if (workers <= 1 || detail::in_parallel_region()) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      detail::in_parallel_region() = true;
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace bellhv
