#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace citk {

// worker count from CI_TOOLKIT_THREADS, else hardware concurrency
int thread_count();

// runs body(i) for i in [0, n); results must be written to per-index slots
void parallel_for(int n, const std::function<void(int)>& body);

// independent 64-bit stream for (seed, index)
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(stream_seed(seed, index));
}

}  // namespace citk
