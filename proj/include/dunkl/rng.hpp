#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace dunkl {

// Philox4x32-10 counter-based generator. Every random number used by the
// simulators is a pure function of (seed, replica, stream, step, substep,
// slot), so results do not depend on thread count or scheduling.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter c, Key k) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
  }
};

// Uniform in the open interval (0,1) from 52 random bits; with 53 the top
// value would round to 1.
inline double bits_to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 12;
  return (static_cast<double>(v) + 0.5) * 0x1.0p-52;
}

// Random numbers for one (replica, stream, step, substep).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint32_t replica, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replica_(replica),
        stream_(stream) {}

  // substep codes: 1 for a whole step, 2c / 2c+1 for the halves of code c.
  void position(std::uint32_t step, std::uint32_t substep) {
    step_ = step;
    sub_ = substep;
  }

  std::array<double, 2> uniform_pair(std::uint32_t slot) const {
    auto r = Philox4x32::generate({replica_, stream_, step_, (sub_ << 8) | (slot & 0xffu)}, key_);
    return {bits_to_unit(r[0], r[1]), bits_to_unit(r[2], r[3])};
  }

  std::array<double, 2> normal_pair(std::uint32_t slot) const {
    auto [u1, u2] = uniform_pair(slot);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    return {rad * std::cos(th), rad * std::sin(th)};
  }

  // Gamma(shape, scale 1) by Marsaglia-Tsang, boosted for shape < 1.
  // Uses slots [first_slot, first_slot + 2*attempts].
  double gamma(double shape, std::uint32_t first_slot) const;

 private:
  Philox4x32::Key key_;
  std::uint32_t replica_, stream_;
  std::uint32_t step_ = 0, sub_ = 1;
};

// I_{k+1/2}(z) / I_{k-1/2}(z) for k >= 0, z >= 0: the sign-survival factor
// of a Bessel bridge of index k - 1/2.
double bessel_ratio(double k, double z);

}  // namespace dunkl
