#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace optf::detail {

/// Worker cap from OPTF_THREADS; 0 or unset means hardware concurrency.
inline std::size_t worker_count() {
  std::size_t n = 0;
  if (const char* env = std::getenv("OPTF_THREADS")) {
    try {
      n = static_cast<std::size_t>(std::stoul(env));
    } catch (...) {
      n = 0;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Splits [0, count) into contiguous chunks, one per worker, and calls
/// fn(chunk, begin, end). Chunk c always covers the same range for a given
/// (count, workers), so per-chunk results can be reduced in chunk order.
template <typename Fn>
void for_each_chunk(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  const std::size_t base = count / workers;
  const std::size_t extra = count % workers;
  auto bounds = [&](std::size_t c) {
    const std::size_t begin = c * base + std::min(c, extra);
    return std::pair{begin, begin + base + (c < extra ? 1 : 0)};
  };
  if (workers == 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t c = 0; c < workers; ++c) {
    const auto [begin, end] = bounds(c);
    pool.emplace_back([&fn, c, begin = begin, end = end] { fn(c, begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace optf::detail
