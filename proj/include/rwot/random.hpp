#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace rwot {

using Rng = std::mt19937_64;

// Counter-based seed splitting: stream `stream`, index `index` of `seed`.
// Distinct (stream, index) pairs give unrelated generator states.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

// Worker count from RWOT_THREADS (0 or unset = hardware concurrency).
int thread_count();

// Runs body(i) for i in [0, count) on up to thread_count() threads. Each
// index runs exactly once; callers write results into per-index slots.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace rwot
