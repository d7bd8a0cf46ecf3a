#pragma once

#include <cstdint>

namespace marketlab::rng {

// Counter-based generator: SplitMix64 evaluated at an explicit counter.
//
// word_at(key, c) = finalize(key + (c + 1) * GOLDEN) where finalize is the
// SplitMix64 output mix (xor-shift-multiply, constants below). Because every
// draw is addressed by (key, counter) the stream is seekable: parallel
// consumers can read disjoint counter ranges and reproduce the serial
// sequence bit for bit. Independent streams are derived by rekeying with
// derive(key, tag); tags are small integers documented at the call sites.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 output mix.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

/// Derive an independent stream key from a parent key and an integer tag.
inline constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t tag) noexcept {
  return mix64(key ^ mix64(tag ^ 0xA0761D6478BD642Full));
}

/// Read-only view of a seekable random stream.
class Stream {
 public:
  constexpr explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  /// 64 random bits addressed by counter.
  constexpr std::uint64_t word_at(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * kGolden);
  }

  /// Uniform double in the open interval (0, 1): 53 mantissa bits, offset by
  /// half an ulp so neither endpoint is reachable (inverse-CDF safe).
  constexpr double uniform_at(std::uint64_t counter) const noexcept {
    return (static_cast<double>(word_at(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Child stream for a sub-task (round, replicate, ...).
  constexpr Stream child(std::uint64_t tag) const noexcept { return Stream(derive(key_, tag)); }

 private:
  std::uint64_t key_;
};

/// Sequential adapter over a Stream for consumers that do not need seeking.
class Sequence {
 public:
  explicit Sequence(Stream stream) noexcept : stream_(stream) {}
  explicit Sequence(std::uint64_t key) noexcept : stream_(key) {}

  std::uint64_t next_word() noexcept { return stream_.word_at(counter_++); }
  double next_uniform() noexcept { return stream_.uniform_at(counter_++); }
  std::uint64_t consumed() const noexcept { return counter_; }

 private:
  Stream stream_;
  std::uint64_t counter_ = 0;
};

// Stream tags for the top-level subcommands; per-module derivations chain
// from these so that every draw in a run is a pure function of --seed.
inline constexpr std::uint64_t kTagSample = 1;
inline constexpr std::uint64_t kTagOrdering = 2;
inline constexpr std::uint64_t kTagSimulate = 3;
inline constexpr std::uint64_t kTagSweep = 4;
inline constexpr std::uint64_t kTagTrain = 5;
inline constexpr std::uint64_t kTagSynthetic = 6;

}  // namespace marketlab::rng
