#ifndef SIDGP_SRC_PARALLEL_HPP
#define SIDGP_SRC_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sidgp::detail {

// Calls fn(i) for i in [0, n) on up to `threads` workers (contiguous blocks).
// The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::ptrdiff_t n, int threads, Fn&& fn) {
  const int workers =
      static_cast<int>(std::clamp<std::ptrdiff_t>(threads, 1, std::max<std::ptrdiff_t>(n, 1)));
  if (workers == 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  const std::ptrdiff_t block = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::ptrdiff_t begin = w * block;
    const std::ptrdiff_t end = std::min(n, begin + block);
    pool.emplace_back([&, begin, end] {
      try {
        for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace sidgp::detail

#endif  // SIDGP_SRC_PARALLEL_HPP
