#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fastbasin {

/// Caps worker threads used by the library; 0 restores the hardware default.
/// Results never depend on this value.
void set_max_threads(unsigned count);
unsigned max_threads();

/// Runs fn(begin, end, worker) over contiguous chunks of [0, n), one chunk per
/// worker. Exceptions from workers are rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(max_threads(), std::max<std::size_t>(n / 4096, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    threads.emplace_back([&, begin, end, w] {
      try {
        fn(begin, end, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Number of chunks parallel_for will use for n items.
inline std::size_t worker_count(std::size_t n) {
  return std::min<std::size_t>(max_threads(), std::max<std::size_t>(n / 4096, 1));
}

}  // namespace fastbasin
