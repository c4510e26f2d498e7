#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>

#include <Eigen/Dense>

namespace qbc {

/// Counter-based pseudorandom stream built on the Philox4x32-10 block
/// function.  A stream is identified by a 64-bit seed (the Philox key) and a
/// 64-bit stream id derived from a hierarchical path of indices, so
/// independent substreams can be carved out deterministically without any
/// shared mutable state.  Two streams with the same (seed, path) produce
/// byte-identical output regardless of thread scheduling or platform.
class RandomStream {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit RandomStream(std::uint64_t seed,
                        std::initializer_list<std::uint64_t> path = {})
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {
    std::uint64_t id = 0;
    for (std::uint64_t index : path) id = mix64(id ^ mix64(index + 1));
    stream_id_ = id;
  }

  /// Child stream: a pure function of this stream's identity and the extra
  /// path indices.  Does not consume or perturb the parent's output sequence.
  RandomStream substream(std::initializer_list<std::uint64_t> path) const {
    RandomStream child(0);
    child.key_ = key_;
    std::uint64_t id = stream_id_;
    for (std::uint64_t index : path) id = mix64(id ^ mix64(index + 1));
    child.stream_id_ = id;
    return child;
  }

  /// One Philox4x32 block: 10 rounds over a 128-bit counter with a 64-bit
  /// key.  Exposed so the known-answer vectors can be checked directly.
  static Counter philox4x32(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t prod0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t prod1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(prod0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(prod0);
      const auto hi1 = static_cast<std::uint32_t>(prod1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(prod1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  std::uint32_t next_u32() {
    if (position_ == 4) {
      buffer_ = philox4x32({static_cast<std::uint32_t>(block_),
                            static_cast<std::uint32_t>(block_ >> 32),
                            static_cast<std::uint32_t>(stream_id_),
                            static_cast<std::uint32_t>(stream_id_ >> 32)},
                           key_);
      ++block_;
      position_ = 0;
    }
    return buffer_[position_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n), free of modulo bias.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Exponential deviate with the given mean; always finite and >= 0.
  double exponential(double mean) {
    return -mean * std::log1p(-uniform01());
  }

  /// Standard normal deviate (Box-Muller; consumes two uniforms).
  double normal01() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Uniformly distributed direction on the unit sphere.
  Eigen::Vector3d unit_vector() {
    const double c = 2.0 * uniform01() - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double phi = 2.0 * 3.14159265358979323846 * uniform01();
    return {s * std::cos(phi), s * std::sin(phi), c};
  }

  // UniformRandomBitGenerator interface.
  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }
  result_type operator()() { return next_u32(); }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  Key key_;
  std::uint64_t stream_id_ = 0;
  std::uint64_t block_ = 0;
  Counter buffer_{};
  int position_ = 4;
};

}  // namespace qbc
