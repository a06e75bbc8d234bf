#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace ihdg {

/// Runs fn(begin, end) over a static, contiguous partition of [0, n) with at most
/// `workers` threads. The partition depends only on (n, workers).
template <class Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers - 1));
  const int chunk = n / workers;
  const int extra = n % workers;
  int begin = 0;
  int first_end = 0;
  for (int w = 0; w < workers; ++w) {
    const int end = begin + chunk + (w < extra ? 1 : 0);
    if (w == 0) {
      first_end = end;
    } else {
      threads.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    begin = end;
  }
  fn(0, first_end);
  for (auto& t : threads) t.join();
}

inline int hardware_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace ihdg
