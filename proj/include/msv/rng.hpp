#pragma once

#include <array>
#include <cstdint>

namespace msv::rng {

/// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror & Shaw 2011).
///
/// Chosen over the std engines because std distribution output is
/// implementation-defined; this generator plus the explicit uniform/normal
/// mappings below produces bit-identical streams on every platform.
/// A (seed, stream) pair selects an independent stream of 2^64 blocks;
/// replication r of a seeded experiment runs on stream r.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  /// Independent generator with the same seed on a different stream.
  Philox substream(std::uint64_t stream) const noexcept { return Philox(seed_, stream); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// One raw 10-round block; exposed so the published known-answer vectors
  /// can be checked directly.
  static std::array<std::uint32_t, 4> raw_block(const std::array<std::uint32_t, 4>& counter,
                                                const std::array<std::uint32_t, 2>& key) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Standard normal via Box-Muller (pairs cached).
  double normal() noexcept;
  /// Uniform integer on {0, 1, ..., n-1} via Lemire's unbiased reduction.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t block_[4];
  int next_word_;
  double cached_normal_;
  bool has_cached_normal_;
};

}  // namespace msv::rng
