#pragma once
// Shared constants and the scalar element pipeline for the counter-based
// generators. The AVX2 translation unit mirrors these operation-for-operation
// (same coefficients, same fma placement) so vector and scalar outputs match
// bitwise. Keep any change here in sync with kernels_avx2.cpp.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace fieldperc::kernels::detail {

inline constexpr std::uint32_t PHILOX_M0 = 0xD2511F53u;
inline constexpr std::uint32_t PHILOX_M1 = 0xCD9E8D57u;
inline constexpr std::uint32_t PHILOX_W0 = 0x9E3779B9u;
inline constexpr std::uint32_t PHILOX_W1 = 0xBB67AE85u;

// log(m) = 2s * P(s^2), s = (m-1)/(m+1), m in [sqrt(1/2), sqrt(2)).
inline constexpr double LOGC[9] = {
    1.0,       1.0 / 3.0,  1.0 / 5.0,  1.0 / 7.0, 1.0 / 9.0,
    1.0 / 11.0, 1.0 / 13.0, 1.0 / 15.0, 1.0 / 17.0};
inline constexpr double LN2_HI = 6.93147180369123816490e-01;
inline constexpr double LN2_LO = 1.90821492927058770002e-10;
// Mantissas at or above sqrt(2) are halved so |s| stays small.
inline constexpr double SQRT2_THRESH = 1.4142135623730951;

// sin r = r + r^3 * S(r^2), cos r = 1 + r^2 * C(r^2), |r| <= pi/4 + eps.
inline constexpr double SINC[7] = {
    -1.0 / 6.0,           1.0 / 120.0,          -1.0 / 5040.0,
    1.0 / 362880.0,       -1.0 / 39916800.0,    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0};
inline constexpr double COSC[7] = {
    -1.0 / 2.0,          1.0 / 24.0,           -1.0 / 720.0,
    1.0 / 40320.0,       -1.0 / 3628800.0,     1.0 / 479001600.0,
    -1.0 / 87178291200.0};
inline constexpr double TWO_OVER_PI = 6.36619772367581382433e-01;
inline constexpr double PIO2_HI = 1.57079632679489655800e+00;
inline constexpr double PIO2_LO = 6.12323399573676603587e-17;
inline constexpr double TWO_PI = 6.28318530717958647693e+00;

struct U32x4 {
  std::uint32_t v[4];
};

inline U32x4 philox_block(std::uint32_t k0, std::uint32_t k1, std::uint32_t c0,
                          std::uint32_t c1, std::uint32_t c2,
                          std::uint32_t c3) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(PHILOX_M0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(PHILOX_M1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += PHILOX_W0;
    k1 += PHILOX_W1;
  }
  return U32x4{{c0, c1, c2, c3}};
}

// Two u32 words -> double in (0,1) carrying 53 random bits:
// u = (2*mant + 1) * 2^-53 built exactly from bit operations.
inline double u53(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t mant =
      (static_cast<std::uint64_t>(a) << 20) | (static_cast<std::uint64_t>(b) >> 12);
  const double x = std::bit_cast<double>(0x3FF0000000000000ull | mant);
  return (x - 1.0) + 0x1p-53;
}

// Natural log of u in (0,1); same scheme as the vector path.
inline double log_u(double u) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(u);
  int e = static_cast<int>(bits >> 52) - 1023;
  double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) |
                                   0x3FF0000000000000ull);
  if (m > SQRT2_THRESH) {
    m *= 0.5;
    e += 1;
  }
  const double s = (m - 1.0) / (m + 1.0);
  const double z = s * s;
  double p = LOGC[8];
  p = std::fma(p, z, LOGC[7]);
  p = std::fma(p, z, LOGC[6]);
  p = std::fma(p, z, LOGC[5]);
  p = std::fma(p, z, LOGC[4]);
  p = std::fma(p, z, LOGC[3]);
  p = std::fma(p, z, LOGC[2]);
  p = std::fma(p, z, LOGC[1]);
  p = std::fma(p, z, LOGC[0]);
  const double lnm = (s + s) * p;
  const double ed = static_cast<double>(e);
  return std::fma(ed, LN2_LO, std::fma(ed, LN2_HI, lnm));
}

inline void sincos_2pi_unit(double u, double* sq, double* cq) {
  const double t = TWO_PI * u;
  const double kd = std::nearbyint(t * TWO_OVER_PI);
  double r = std::fma(-kd, PIO2_HI, t);
  r = std::fma(-kd, PIO2_LO, r);
  const int q = static_cast<int>(kd) & 3;
  const double z = r * r;
  double ps = SINC[6];
  ps = std::fma(ps, z, SINC[5]);
  ps = std::fma(ps, z, SINC[4]);
  ps = std::fma(ps, z, SINC[3]);
  ps = std::fma(ps, z, SINC[2]);
  ps = std::fma(ps, z, SINC[1]);
  ps = std::fma(ps, z, SINC[0]);
  const double sn = std::fma(r * z, ps, r);
  double pc = COSC[6];
  pc = std::fma(pc, z, COSC[5]);
  pc = std::fma(pc, z, COSC[4]);
  pc = std::fma(pc, z, COSC[3]);
  pc = std::fma(pc, z, COSC[2]);
  pc = std::fma(pc, z, COSC[1]);
  pc = std::fma(pc, z, COSC[0]);
  const double cs = std::fma(z, pc, 1.0);
  switch (q) {
    case 0: *sq = sn;  *cq = cs;  break;
    case 1: *sq = cs;  *cq = -sn; break;
    case 2: *sq = -sn; *cq = -cs; break;
    default: *sq = -cs; *cq = sn; break;
  }
}

// One Box-Muller pair for absolute pair index `p` of (seed, stream).
inline void normal_pair(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t p, double* z0, double* z1) {
  const U32x4 r = philox_block(
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32));
  const double u1 = u53(r.v[0], r.v[1]);
  const double u2 = u53(r.v[2], r.v[3]);
  const double rad = std::sqrt(-2.0 * log_u(u1));
  double sn, cs;
  sincos_2pi_unit(u2, &sn, &cs);
  *z0 = rad * cs;
  *z1 = rad * sn;
}

inline void uniform_pair(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t p, double* u1, double* u2) {
  const U32x4 r = philox_block(
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32));
  *u1 = u53(r.v[0], r.v[1]);
  *u2 = u53(r.v[2], r.v[3]);
}

}  // namespace fieldperc::kernels::detail

namespace fieldperc::kernels::detail_dispatch {

// Runtime-selected implementation set. kernels.cpp holds the scalar table and
// the selection logic; kernels_avx2.cpp provides the vector table (or a null
// pointer on targets without AVX2 support).
struct Table {
  const char* name;
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*xpay)(const double*, double, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*rmin)(const double*, std::size_t);
  double (*rmax)(const double*, std::size_t);
  void (*stencil)(const double*, const std::int32_t*, int, double, double*,
                  std::size_t);
  void (*threshold)(const double*, double, std::uint8_t*, std::size_t);
  void (*hadamard)(const double*, const double*, double*, std::size_t);
  void (*normal_fill)(std::uint64_t, std::uint64_t, std::uint64_t, double*,
                      std::size_t);
  void (*uniform_fill)(std::uint64_t, std::uint64_t, std::uint64_t, double*,
                       std::size_t);
};

const Table* avx2_table();

}  // namespace fieldperc::kernels::detail_dispatch
