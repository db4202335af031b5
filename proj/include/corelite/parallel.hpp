// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace corelite {

/// Resolves a requested worker count; 0 means one per hardware thread.
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, count) into at most `workers` contiguous chunks and calls
/// fn(chunk, begin, end) for each, one thread per chunk. Chunk boundaries
/// depend only on (count, workers). Exceptions from workers are rethrown.
template <typename Fn>
void for_each_chunk(std::size_t count, unsigned workers, Fn&& fn) {
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(workers, count));
  const std::size_t step = (count + chunks - 1) / std::max<std::size_t>(chunks, 1);
  if (chunks == 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> pool;
    pool.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) {
      const std::size_t begin = std::min(count, c * step);
      const std::size_t end = std::min(count, begin + step);
      pool.emplace_back([&, c, begin, end] {
        try {
          fn(c, begin, end);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    try {
      fn(std::size_t{0}, std::size_t{0}, std::min(count, step));
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace corelite
