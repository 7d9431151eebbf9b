#include "msv/rng.hpp"

#include <cmath>
#include <numbers>

namespace msv::rng {

namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3) - 1

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) noexcept {
  const std::uint64_t prod0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
  const std::uint64_t prod1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
  const std::uint32_t n0 = hi1 ^ ctr[1] ^ key[0];
  const std::uint32_t n1 = lo1;
  const std::uint32_t n2 = hi0 ^ ctr[3] ^ key[1];
  const std::uint32_t n3 = lo0;
  ctr[0] = n0;
  ctr[1] = n1;
  ctr[2] = n2;
  ctr[3] = n3;
}

inline void philox_10rounds(std::uint32_t ctr[4], std::uint32_t key[2]) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    philox_round(ctr, key);
  }
}

}  // namespace

std::array<std::uint32_t, 4> Philox::raw_block(const std::array<std::uint32_t, 4>& counter,
                                               const std::array<std::uint32_t, 2>& key) noexcept {
  std::uint32_t ctr[4] = {counter[0], counter[1], counter[2], counter[3]};
  std::uint32_t k[2] = {key[0], key[1]};
  philox_10rounds(ctr, k);
  return {ctr[0], ctr[1], ctr[2], ctr[3]};
}

Philox::Philox(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed),
      stream_(stream),
      next_word_(4),
      cached_normal_(0.0),
      has_cached_normal_(false) {
  key_[0] = static_cast<std::uint32_t>(seed);
  key_[1] = static_cast<std::uint32_t>(seed >> 32);
  ctr_[0] = 0;
  ctr_[1] = 0;
  ctr_[2] = static_cast<std::uint32_t>(stream);
  ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
}

void Philox::refill() noexcept {
  std::uint32_t ctr[4] = {ctr_[0], ctr_[1], ctr_[2], ctr_[3]};
  std::uint32_t key[2] = {key_[0], key_[1]};
  philox_10rounds(ctr, key);
  block_[0] = ctr[0];
  block_[1] = ctr[1];
  block_[2] = ctr[2];
  block_[3] = ctr[3];
  next_word_ = 0;
  // 64-bit block counter in words 0..1; words 2..3 hold the stream id.
  if (++ctr_[0] == 0) ++ctr_[1];
}

std::uint32_t Philox::next_u32() noexcept {
  if (next_word_ >= 4) refill();
  return block_[next_word_++];
}

std::uint64_t Philox::next_u64() noexcept {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double Philox::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Philox::uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform();
}

double Philox::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller on u1 in (0,1], u2 in [0,1); u1 > 0 keeps the log finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Philox::below(std::uint64_t n) noexcept {
  if (n <= 1) return 0;
  // Lemire's multiply-shift with the debiasing retry loop.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = next_u64();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

}  // namespace msv::rng
