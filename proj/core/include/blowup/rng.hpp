#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace blowup {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the random stream for (seed, path index, stream id). Streams of one path are
/// independent of each other and of every other path, so results never depend on how
/// paths are distributed over workers.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) noexcept;

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0);

/// Number of workers to use when the caller passes 0.
unsigned default_workers() noexcept;

/// Runs body(i) for i in [0, n) on `workers` threads (0 = default), contiguous blocks per
/// thread. The first exception thrown by any body is rethrown after all threads join.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace blowup
