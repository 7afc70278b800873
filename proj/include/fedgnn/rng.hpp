#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedgnn {

using Rng = std::mt19937_64;

// Stream tags for `derive_seed`. Every random decision in a run is keyed by
// the run seed plus one of these tags and a few indices.
enum class Stream : std::uint64_t {
  kSplit = 1,
  kPartition = 2,
  kClientRoles = 3,
  kTrigger = 4,
  kInit = 5,
  kEvalInjection = 6,
  kClientRound = 7,
  kGenerator = 8,
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                          std::initializer_list<std::uint64_t> indices = {});

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform real in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Uniform integer in [0, n) by rejection; n > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

}  // namespace fedgnn
