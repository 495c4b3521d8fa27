#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace qtrbm {

using Rng = std::mt19937_64;

/// Hashes a sequence of keys (seed, epoch, batch, sample, ...) into one
/// 64-bit seed. Used to derive independent per-item streams so that results
/// do not depend on evaluation order or thread count.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys);

inline Rng make_stream(std::initializer_list<std::uint64_t> keys) { return Rng(derive_seed(keys)); }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

inline double uniform_range(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

// Stream domains, mixed into derive_seed so that different consumers of the
// same user seed never share a stream.
enum class StreamTag : std::uint64_t {
  kTrainShuffle = 1,
  kTrainQuery = 2,
  kValidQueries = 3,
  kInit = 4,
  kPcdChains = 5,
  kGibbsInference = 6,
  kSynthetic = 7,
  kSplit = 8,
  kEvalQueries = 9,
  kGradCheck = 10,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

}  // namespace qtrbm
