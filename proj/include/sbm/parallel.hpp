#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "sbm/rng.hpp"

namespace sbm {

/// How a batch of independent paths is seeded and spread over threads.
/// Paths are grouped in fixed-size blocks; block b draws from
/// make_rng(seed, stream, b) and block results are merged in block order,
/// so results are bit-identical for any lane count.
struct RunOptions {
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  int lanes = 1;
  std::uint64_t block_size = 4096;

  RunOptions with_stream(std::uint64_t s) const {
    RunOptions o = *this;
    o.stream = s;
    return o;
  }
  /// Independent child stream for sub-estimator `tag`.
  RunOptions child(std::uint64_t tag) const { return with_stream(splitmix64(stream * 0x100000001b3ULL + tag + 1)); }
};

/// Runs `n` paths. `make()` builds an empty per-block accumulator,
/// `path(rng, acc)` simulates one path into it, `merge(into, from)` folds
/// block accumulators together (in block order).
template <class Make, class Path, class Merge>
auto run_blocks(std::uint64_t n, const RunOptions& opt, Make make, Path path, Merge merge) {
  using Acc = decltype(make());
  const std::uint64_t bs = opt.block_size ? opt.block_size : 4096;
  const std::uint64_t blocks = (n + bs - 1) / bs;
  std::vector<std::optional<Acc>> results(blocks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        Rng rng = make_rng(opt.seed, opt.stream, b);
        Acc acc = make();
        const std::uint64_t end = std::min(n, (b + 1) * bs);
        for (std::uint64_t i = b * bs; i < end; ++i) path(rng, acc);
        results[b].emplace(std::move(acc));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };

  const int lanes = std::max(1, opt.lanes);
  if (lanes == 1 || blocks <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < lanes; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  Acc total = make();
  for (auto& r : results) merge(total, *r);
  return total;
}

}  // namespace sbm
