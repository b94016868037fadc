#pragma once

#include <cmath>
#include <cstdint>

namespace vallois {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// Each (seed, path) pair addresses an independent stream; the draw order is
// a pure function of the block counter, so parallel scheduling cannot
// reorder draws.
class PhiloxRng {
 public:
  PhiloxRng(std::uint64_t seed, std::uint64_t path)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

  // Standard normal via Box-Muller; one Philox block yields two normals.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    std::uint32_t r[4];
    block(block_index_++, r);
    const double u1 = to_unit_open0(r[0], r[1]);  // in (0, 1]
    const double u2 = to_unit(r[2], r[3]);        // in [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double uniform() {
    std::uint32_t r[4];
    block(block_index_++, r);
    return to_unit(r[0], r[1]);
  }

 private:
  static void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi,
                        std::uint32_t* lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    *hi = static_cast<std::uint32_t>(p >> 32);
    *lo = static_cast<std::uint32_t>(p);
  }

  void block(std::uint64_t index, std::uint32_t out[4]) const {
    std::uint32_t c0 = static_cast<std::uint32_t>(index);
    std::uint32_t c1 = static_cast<std::uint32_t>(index >> 32);
    std::uint32_t c2 = path_lo_;
    std::uint32_t c3 = path_hi_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mul_hi_lo(0xD2511F53u, c0, &hi0, &lo0);
      mul_hi_lo(0xCD9E8D57u, c2, &hi1, &lo1);
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
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
  }

  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(hi) << 32) | static_cast<std::uint64_t>(lo);
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  static double to_unit_open0(std::uint32_t hi, std::uint32_t lo) {
    return 1.0 - to_unit(hi, lo);
  }

  std::uint32_t key0_, key1_, path_lo_, path_hi_;
  std::uint64_t block_index_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vallois
