#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nlbit {

/// Runs per chunk. A chunk is the unit of both randomness (chunk k draws from
/// stream k) and scheduling, so the worker count never changes results.
inline constexpr std::uint64_t kChunkRuns = std::uint64_t{1} << 16;

/// Calls fn(chunk_index, first_run, run_count) for every chunk covering
/// [0, n) and returns the per-chunk results in chunk order.
template <class Result, class ChunkFn>
std::vector<Result> map_chunks(std::uint64_t n, unsigned workers, ChunkFn&& fn) {
  const std::uint64_t chunks = (n + kChunkRuns - 1) / kChunkRuns;
  std::vector<Result> results(chunks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto drain = [&] {
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= chunks) return;
      const std::uint64_t first = k * kChunkRuns;
      try {
        results[k] = fn(k, first, std::min(kChunkRuns, n - first));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };

  const auto pool_size = static_cast<unsigned>(std::min<std::uint64_t>(std::max(workers, 1u), chunks));
  if (pool_size <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(pool_size);
    for (unsigned i = 0; i < pool_size; ++i) pool.emplace_back(drain);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace nlbit
