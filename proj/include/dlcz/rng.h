#ifndef DLCZ_RNG_H_
#define DLCZ_RNG_H_

#include <cstdint>
#include <limits>

namespace dlcz {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator.
///
/// Per-trial streams come from a counter-based split of the master seed:
///   seed_i = mix64(master_seed + (i + 1) * 0x9E3779B97F4A7C15)
/// where mix64 is the SplitMix64 output finalizer. Uniform doubles take the
/// top 53 bits: (next() >> 11) * 2^-53, so draws lie in [0, 1).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  double uniform();

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace dlcz

#endif  // DLCZ_RNG_H_
