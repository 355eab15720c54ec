#pragma once

// Seeded random streams.
//
// Every random decision in the library draws from an Rng whose seed is derived
// from (master seed, stream tag, a, b) by a SplitMix64 hash chain. Streams in
// use:
//
//   Stream::UserData      a = user_id              population generation
//   Stream::Participants  a = round                server-side User sampling
//   Stream::ClientBatch   a = round, b = user_id   local mini-batch draws
//
// Because each User owns its substream, User k's data does not change when
// the population grows, and client results do not depend on execution order
// or thread count. The engine is std::mt19937_64 (output fully specified by
// the standard) and distributions come from Boost.Random, whose algorithms are
// identical on every platform, so streams are reproducible across toolchains.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace fedctmc {

enum class Stream : std::uint64_t {
  UserData = 1,
  Participants = 2,
  ClientBatch = 3,
  Test = 99,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t a = 0,
                          std::uint64_t b = 0);

class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform01();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double sd = 1.0);
  /// Uniform integer on [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Index drawn with probability proportional to weights.
  std::size_t categorical(const std::vector<double>& weights);

  /// k distinct indices from [0, n), uniformly, in draw order (partial
  /// Fisher-Yates). k is clamped to n.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fedctmc
