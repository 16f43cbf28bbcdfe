#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fedchain/vec.hpp"

namespace fedchain {

// Purpose tags keep independent draw streams from colliding.
enum class Purpose : std::uint32_t {
  kClientSample = 1,
  kGradNoise = 2,
  kValueNoise = 3,
  kSelection = 4,
  kWarmStart = 5,
  kRefreshSample = 6,
  kRefreshNoise = 7,
  kProblemInit = 8,
  kMisc = 9,
};

// Counter-based random stream.  A draw is a pure function of
// (seed, client, round, step, purpose, draw index): the same key always
// yields the same bits, no matter which thread asks or in what order.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint32_t client = 0;
  std::uint32_t round = 0;
  std::uint32_t step = 0;
  std::uint32_t purpose = 0;

  RngStream() = default;
  RngStream(std::uint64_t seed_, std::uint32_t client_, std::uint32_t round_,
            std::uint32_t step_, Purpose purpose_)
      : seed(seed_),
        client(client_),
        round(round_),
        step(step_),
        purpose(static_cast<std::uint32_t>(purpose_)) {
    if (client >= (1u << 24) || round >= (1u << 20) || step >= (1u << 12) ||
        purpose >= (1u << 8)) {
      throw std::invalid_argument("RngStream: stream id field out of range");
    }
  }
};

namespace detail {

// Philox4x32-10 (Salmon et al.), the standard counter-based generator.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::uint32_t k0,
                                               std::uint32_t k1) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const std::array<std::uint32_t, 4> next = {
        static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
        static_cast<std::uint32_t>(p0)};
    ctr = next;
    k0 += kW0;
    k1 += kW1;
  }
  return ctr;
}

inline std::array<std::uint32_t, 4> block(const RngStream& s,
                                          std::uint64_t index) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(index),
      static_cast<std::uint32_t>(index >> 32),
      (s.client & 0xFFFFFFu) | (s.purpose << 24),
      (s.round & 0xFFFFFu) | ((s.step & 0xFFFu) << 20)};
  return philox4x32(ctr, static_cast<std::uint32_t>(s.seed),
                    static_cast<std::uint32_t>(s.seed >> 32));
}

inline std::uint64_t to_u64(std::uint32_t lo, std::uint32_t hi) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// Maps to (0,1]; never returns 0 so it is safe under log().
inline double u64_to_unit(std::uint64_t x) {
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

inline std::uint64_t uniform_u64(const RngStream& s, std::uint64_t index) {
  const auto b = detail::block(s, index);
  return detail::to_u64(b[0], b[1]);
}

inline double uniform01(const RngStream& s, std::uint64_t index) {
  return detail::u64_to_unit(uniform_u64(s, index));
}

// Unbiased-enough bounded draw (multiply-shift); n must be positive.
inline std::uint32_t uniform_below(const RngStream& s, std::uint64_t index,
                                   std::uint32_t n) {
  const unsigned __int128 p =
      static_cast<unsigned __int128>(uniform_u64(s, index)) * n;
  return static_cast<std::uint32_t>(p >> 64);
}

// i-th standard normal of the stream, Box-Muller on one Philox block per pair.
inline double normal(const RngStream& s, std::uint64_t index) {
  const auto b = detail::block(s, index / 2);
  const double u1 = detail::u64_to_unit(detail::to_u64(b[0], b[1]));
  const double u2 = detail::u64_to_unit(detail::to_u64(b[2], b[3]));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * M_PI * u2;
  return (index % 2 == 0) ? r * std::cos(t) : r * std::sin(t);
}

// n i.i.d. standard normal draws, deterministic in (stream, draw index).
inline Vector gaussian(const RngStream& s, int n) {
  if (n < 1) throw std::invalid_argument("gaussian: n must be >= 1");
  Vector out(n);
  for (int i = 0; i + 1 < n; i += 2) {
    const auto b = detail::block(s, static_cast<std::uint64_t>(i) / 2);
    const double u1 = detail::u64_to_unit(detail::to_u64(b[0], b[1]));
    const double u2 = detail::u64_to_unit(detail::to_u64(b[2], b[3]));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    out[i] = r * std::cos(t);
    out[i + 1] = r * std::sin(t);
  }
  if (n % 2 == 1) out[n - 1] = normal(s, static_cast<std::uint64_t>(n) - 1);
  return out;
}

}  // namespace fedchain
