#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace perclab {

/// Worker count from PERCLAB_WORKERS, else the hardware concurrency.
unsigned default_workers();

/// Runs body(first, last, tally) over contiguous replicate blocks and merges
/// the tallies in block order with tally.merge(other). Results depend only on
/// the per-replicate work, never on `workers`, as long as merge is exact
/// (integer sums, ordered concatenation).
template <class Tally, class Body>
Tally run_replicates(std::uint64_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, unsigned(std::max<std::uint64_t>(count, 1))));
  std::vector<Tally> tallies(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto block = [&](unsigned w) {
    const std::uint64_t first = count * w / workers;
    const std::uint64_t last = count * (w + 1) / workers;
    try {
      body(first, last, tallies[w]);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    block(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(block, w);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Tally total = std::move(tallies[0]);
  for (unsigned w = 1; w < workers; ++w) total.merge(tallies[w]);
  return total;
}

}  // namespace perclab
