// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

namespace entconc {

/// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit counter
/// and a 64-bit key to 128 pseudo-random bits.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Independent substream families. Each family owns the top byte of the
/// 64-bit substream index so replicate streams never collide with the streams
/// used to generate parameters or optimizer starts.
enum class StreamPurpose : std::uint8_t {
  replicate = 0,
  parameters = 1,
  optimizer = 2,
  coding = 3,
  test = 0xff,
};

constexpr std::uint64_t substream_id(StreamPurpose purpose,
                                     std::uint64_t index) noexcept {
  return (std::uint64_t{static_cast<std::uint8_t>(purpose)} << 56) |
         (index & 0x00ff'ffff'ffff'ffffull);
}

/// Counter-based random stream keyed by (seed, substream). Two streams with the
/// same key produce the same sequence no matter which thread drives them.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t substream) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        substream_(substream) {}

  RandomStream(std::uint64_t seed, StreamPurpose purpose,
               std::uint64_t index) noexcept
      : RandomStream(seed, substream_id(purpose, index)) {}

  std::uint64_t next_u64() noexcept {
    if (slot_ == 2) refill();
    return buffer_[slot_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1].
  double uniform_open_low() noexcept { return 1.0 - uniform(); }

  std::uint64_t substream() const noexcept { return substream_; }

 private:
  void refill() noexcept {
    const Philox4x32::Counter ctr{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(substream_),
        static_cast<std::uint32_t>(substream_ >> 32)};
    const auto out = Philox4x32::apply(ctr, key_);
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    ++block_;
    slot_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int slot_ = 2;
};

}  // namespace entconc
