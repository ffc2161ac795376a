#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "slipstokes/types.hpp"

namespace slipstokes {

/// Splits [0, n) into contiguous chunks, one per worker, and runs
/// `work(chunk, begin, end)` on each. Chunk boundaries depend only on `n`
/// and the chunk count, so callers that merge per-chunk results in chunk
/// order get bit-identical output for any thread count.
template <class Work>
void for_each_chunk(int n, int chunks, Work&& work) {
  chunks = std::max(1, std::min(chunks, n));
  auto bounds = [&](int c) { return static_cast<int>(static_cast<long long>(n) * c / chunks); };
  if (num_threads() <= 1 || chunks == 1) {
    for (int c = 0; c < chunks; ++c) work(c, bounds(c), bounds(c + 1));
    return;
  }
  std::vector<std::thread> pool;
  const int workers = std::min(num_threads(), chunks);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int c = w; c < chunks; c += workers) work(c, bounds(c), bounds(c + 1));
    });
  }
  for (auto& t : pool) t.join();
}

/// Fixed chunk count used for deterministic reductions.
inline constexpr int kReductionChunks = 16;

}  // namespace slipstokes
