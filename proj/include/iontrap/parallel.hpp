#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace iontrap {

// Static-chunked parallel for. Work items must be independent; results keyed
// by index so output never depends on scheduling.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                         unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace iontrap
