#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace tirefit {

// Worker count: TIREFIT_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() threads. Indices are
// handed out dynamically; the first exception thrown by any body is
// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Independent 64-bit seed for stream `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace tirefit
