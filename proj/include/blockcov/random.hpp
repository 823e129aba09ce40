#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace blockcov {

/// All randomness goes through this engine. std::mt19937_64 is specified bit
/// for bit by the standard; distributions come from Boost.Random so sampled
/// values do not depend on the standard library implementation.
using Rng = std::mt19937_64;

/// Seed of substream `stream` under master seed `seed`:
/// splitmix64(seed ^ splitmix64(stream)). Used for replicates, splits and
/// restarts so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform random permutation of 0..size-1 (Fisher-Yates).
std::vector<int> random_permutation(int size, Rng& rng);

/// In-place Fisher-Yates shuffle.
void shuffle(std::span<double> values, Rng& rng);

double standard_normal(Rng& rng);
double uniform(double lo, double hi, Rng& rng);

}  // namespace blockcov
