#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

namespace sombra {

/// Default worker count: $SOMBRA_WORKERS when set to a positive integer,
/// otherwise the hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv("SOMBRA_WORKERS")) {
    std::string_view s(env);
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into `workers` contiguous ranges and runs
/// fn(begin, end, worker_index) on each, the first on the calling thread.
/// The first exception thrown by any worker is rethrown after all join.
template <class Fn>
void parallel_for(unsigned workers, std::size_t n, Fn&& fn) {
  workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(workers, n)));
  if (workers == 1) {
    fn(std::size_t{0}, n, 0u);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto guarded = [&](std::size_t b, std::size_t e, unsigned w) {
    try {
      fn(b, e, w);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  auto range_begin = [&](unsigned w) { return w * base + std::min<std::size_t>(w, extra); };
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) {
      threads.emplace_back(guarded, range_begin(w), range_begin(w + 1), w);
    }
    guarded(range_begin(0), range_begin(1), 0u);
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sombra
