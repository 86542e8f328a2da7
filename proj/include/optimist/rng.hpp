#pragma once

#include <cstdint>
#include <limits>

namespace optimist {

// Counter-based random streams.
//
// Every draw in a simulation is addressed by (master seed, replication,
// stream, step). The address is hashed into a 64-bit key and the engine
// emits splitmix64(key + k * golden) for k = 1, 2, ... . Two addresses
// never share state, so replications can run in any order or on any
// thread and still reproduce bit-exactly.
//
// Stream ids: arm i uses stream i (step = pull index of that arm);
// perturbations use kPerturbStream (step = time t); auxiliary Monte-Carlo
// paths use kCoverageStream / kFeatureStream.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kPerturbStream = 0xFFFF'FFFF'0000'0001ULL;
inline constexpr std::uint64_t kCoverageStream = 0xFFFF'FFFF'0000'0002ULL;
inline constexpr std::uint64_t kFeatureStream = 0xFFFF'FFFF'0000'0003ULL;

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t replication,
                                   std::uint64_t stream, std::uint64_t step) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ replication);
  k = splitmix64(k ^ stream);
  return splitmix64(k ^ step);
}

// Satisfies UniformRandomBitGenerator so <random> distributions apply.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key) : key_(key) {}
  constexpr CounterRng(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream,
                       std::uint64_t step)
      : key_(stream_key(seed, replication, stream, step)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return splitmix64(key_ + kGolden * ++counter_); }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace optimist
