#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ensctl {

/// Mixes a 64-bit word (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive hash of a list of words; used to derive substream ids.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words);

/// Hash of an ASCII tag, so experiment kinds and method names can feed hash_words.
std::uint64_t hash_tag(const char* tag);

/// Deterministic random stream identified by (master_seed, stream_id).
///
/// Two streams with the same pair produce the same sequence. Draws never
/// depend on how many other streams exist, which is what keeps parallel
/// ensemble generation reproducible.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Child stream for index `i`, derived by counter hashing.
  RngStream substream(std::uint64_t i) const;

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace ensctl
