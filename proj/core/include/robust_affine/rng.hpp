#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. 2011). Every
// (seed, path, purpose) triple owns an independent stream, so results never
// depend on how paths are scheduled across threads or batches.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace robust_affine {

enum class StreamPurpose : std::uint32_t {
  Diffusion = 1,
  DefaultThreshold = 2,
  Asset = 3,
  Strategy = 4,
};

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(Block ctr) const noexcept {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  static Block single_round(const Block& c, const std::array<std::uint32_t, 2>& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  std::array<std::uint32_t, 2> key_;
};

/// Maps 64 random bits to a double in (0, 1] with 53-bit resolution.
inline double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

/// Sequential access to one substream. Block index k of the counter
/// yields two uniforms, or two normals via Box-Muller.
class SubStream {
 public:
  SubStream(std::uint64_t seed, std::uint64_t path, StreamPurpose purpose) noexcept
      : gen_(seed),
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)),
        purpose_(static_cast<std::uint32_t>(purpose)) {}

  std::array<double, 2> uniforms(std::uint32_t block) const noexcept {
    const auto r = gen_({block, path_lo_, path_hi_, purpose_});
    return {to_unit_open_closed(r[0], r[1]), to_unit_open_closed(r[2], r[3])};
  }

  std::array<double, 2> normals(std::uint32_t block) const noexcept {
    const auto u = uniforms(block);
    const double radius = std::sqrt(-2.0 * std::log(u[0]));
    const double angle = 2.0 * std::numbers::pi * u[1];
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double next_normal() noexcept {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const auto z = normals(block_++);
    spare_ = z[1];
    cached_ = true;
    return z[0];
  }

  double next_uniform() noexcept {
    if (ucached_) {
      ucached_ = false;
      return uspare_;
    }
    const auto u = uniforms(block_++);
    uspare_ = u[1];
    ucached_ = true;
    return u[0];
  }

 private:
  Philox4x32 gen_;
  std::uint32_t path_lo_, path_hi_, purpose_;
  std::uint32_t block_ = 0;
  double spare_ = 0.0;
  bool cached_ = false;
  double uspare_ = 0.0;
  bool ucached_ = false;
};

}  // namespace robust_affine
