#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace wcga::detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Splits [0, count) into contiguous chunks, one per worker, and calls
/// body(chunk_index, begin, end). Chunk boundaries depend only on count and
/// the thread count. The first exception in chunk order is rethrown.
template <class Body>
void for_each_chunk(std::size_t count, unsigned threads, std::size_t chunks, Body&& body) {
  if (chunks == 0) return;
  std::vector<std::exception_ptr> errors(chunks);
  auto run = [&](std::size_t c) {
    const std::size_t begin = count * c / chunks;
    const std::size_t end = count * (c + 1) / chunks;
    try {
      body(c, begin, end);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const unsigned workers = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += workers) run(c);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace wcga::detail
