#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace lecam {

// Counter-based stream: Philox 4x32-10 (Salmon et al., SC 2011).
// A stream is addressed by (seed, stream id) and is statistically
// independent of every other stream under the same seed, so Monte Carlo
// replicates can be generated in any order, or in parallel, without
// coordination.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : block_(0), stream_(stream) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
  }

  std::uint64_t next_u64() {
    if (have_ == 0) refill();
    have_ -= 2;
    return (static_cast<std::uint64_t>(out_[have_ + 1]) << 32) | out_[have_];
  }

  // uniform on [0,1) with 53 random bits
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; the spare value is cached
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] keeps the log finite
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static void mul_hi_lo(std::uint32_t a, std::uint32_t b,
                        std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mul_hi_lo(0xD2511F53u, c0, hi0, lo0);
      mul_hi_lo(0xCD9E8D57u, c2, hi1, lo1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c0;
    out_[1] = c1;
    out_[2] = c2;
    out_[3] = c3;
    have_ = 4;
    ++block_;
  }

  std::uint32_t key_[2];
  std::uint64_t block_;
  std::uint64_t stream_;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lecam
