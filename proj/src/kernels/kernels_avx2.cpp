// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; selected at runtime
// only when the CPU reports both features. The counter-based generator mirrors
// the scalar pipeline in kernels_detail.hpp operation-for-operation so outputs
// are bit-identical (tested in test_kernels.cpp).

#include "fieldperc/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

#include "kernels_detail.hpp"

namespace fieldperc::kernels {
namespace {

constexpr std::size_t kChunk = 4096;

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void xpay_avx2(const double* x, double a, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i),
                                 _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] = std::fma(a, y[i], x[i]);
}

void scal_avx2(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double dot_chunk_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  double lanes[4];
  _mm256_storeu_pd(lanes, acc0);
  double acc = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
  for (; i < n; ++i) acc = std::fma(x[i], y[i], acc);
  return acc;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  double total = 0.0;
  for (std::size_t off = 0; off < n; off += kChunk) {
    const std::size_t len = (n - off < kChunk) ? n - off : kChunk;
    total += dot_chunk_avx2(x + off, y + off, len);
  }
  return total;
}

double sum_chunk_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double lanes[4];
  _mm256_storeu_pd(lanes, acc0);
  double acc = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double sum_avx2(const double* x, std::size_t n) {
  double total = 0.0;
  for (std::size_t off = 0; off < n; off += kChunk) {
    const std::size_t len = (n - off < kChunk) ? n - off : kChunk;
    total += sum_chunk_avx2(x + off, len);
  }
  return total;
}

double reduce_min_avx2(const double* x, std::size_t n) {
  double m = x[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4)
      vm = _mm256_min_pd(vm, _mm256_loadu_pd(x + i));
    double lanes[4];
    _mm256_storeu_pd(lanes, vm);
    m = lanes[0];
    for (int k = 1; k < 4; ++k) m = lanes[k] < m ? lanes[k] : m;
  }
  for (; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

double reduce_max_avx2(const double* x, std::size_t n) {
  double m = x[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4)
      vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
    double lanes[4];
    _mm256_storeu_pd(lanes, vm);
    m = lanes[0];
    for (int k = 1; k < 4; ++k) m = lanes[k] > m ? lanes[k] : m;
  }
  for (; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

void stencil_avx2(const double* x, const std::int32_t* nb, int deg, double c,
                  double* y, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(-c);
  std::size_t i = 0;
  const std::size_t degz = static_cast<std::size_t>(deg);
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    const std::int32_t* r0 = nb + i * degz;
    const std::int32_t* r1 = r0 + degz;
    const std::int32_t* r2 = r1 + degz;
    const std::int32_t* r3 = r2 + degz;
    for (int k = 0; k < deg; ++k) {
      const __m128i idx = _mm_set_epi32(r3[k], r2[k], r1[k], r0[k]);
      acc = _mm256_add_pd(acc, _mm256_i32gather_pd(x, idx, 8));
    }
    const __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vc, acc, vx));
  }
  for (; i < n; ++i) {
    const std::int32_t* row = nb + i * degz;
    double acc = 0.0;
    for (int k = 0; k < deg; ++k) acc += x[row[k]];
    y[i] = std::fma(-c, acc, x[i]);
  }
}

void threshold_avx2(const double* x, double h, std::uint8_t* out,
                    std::size_t n) {
  const __m256d vh = _mm256_set1_pd(h);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, vh, _CMP_GE_OQ));
    out[i] = static_cast<std::uint8_t>(mask & 1);
    out[i + 1] = static_cast<std::uint8_t>((mask >> 1) & 1);
    out[i + 2] = static_cast<std::uint8_t>((mask >> 2) & 1);
    out[i + 3] = static_cast<std::uint8_t>((mask >> 3) & 1);
  }
  for (; i < n; ++i) out[i] = x[i] >= h ? 1 : 0;
}

void hadamard_avx2(const double* z, const double* s, double* out,
                   std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(z + i), _mm256_loadu_pd(s + i)));
  for (; i < n; ++i) out[i] = z[i] * s[i];
}

// ---- vector Box-Muller pipeline (4 pairs / 8 normals per step) ----

struct Philox4 {
  __m256i r0, r1, r2, r3;  // each: four u32 values in the low dwords of u64 lanes
};

inline Philox4 philox_block4(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t p0) {
  const __m256i lowmask = _mm256_set1_epi64x(0xFFFFFFFFll);
  const __m256i m0 = _mm256_set1_epi64x(detail::PHILOX_M0);
  const __m256i m1 = _mm256_set1_epi64x(detail::PHILOX_M1);
  const __m256i w0 = _mm256_set1_epi64x(detail::PHILOX_W0);
  const __m256i w1 = _mm256_set1_epi64x(detail::PHILOX_W1);
  __m256i k0 = _mm256_set1_epi64x(static_cast<std::uint32_t>(seed));
  __m256i k1 = _mm256_set1_epi64x(static_cast<std::uint32_t>(seed >> 32));
  __m256i c0 = _mm256_set_epi64x(
      static_cast<std::uint32_t>(p0 + 3), static_cast<std::uint32_t>(p0 + 2),
      static_cast<std::uint32_t>(p0 + 1), static_cast<std::uint32_t>(p0));
  __m256i c1 = _mm256_set_epi64x(static_cast<std::uint32_t>((p0 + 3) >> 32),
                                 static_cast<std::uint32_t>((p0 + 2) >> 32),
                                 static_cast<std::uint32_t>((p0 + 1) >> 32),
                                 static_cast<std::uint32_t>(p0 >> 32));
  __m256i c2 = _mm256_set1_epi64x(static_cast<std::uint32_t>(stream));
  __m256i c3 = _mm256_set1_epi64x(static_cast<std::uint32_t>(stream >> 32));
  for (int round = 0; round < 10; ++round) {
    const __m256i prod0 = _mm256_mul_epu32(m0, c0);
    const __m256i prod1 = _mm256_mul_epu32(m1, c2);
    const __m256i hi0 = _mm256_srli_epi64(prod0, 32);
    const __m256i lo0 = _mm256_and_si256(prod0, lowmask);
    const __m256i hi1 = _mm256_srli_epi64(prod1, 32);
    const __m256i lo1 = _mm256_and_si256(prod1, lowmask);
    const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
    const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
    k0 = _mm256_and_si256(_mm256_add_epi64(k0, w0), lowmask);
    k1 = _mm256_and_si256(_mm256_add_epi64(k1, w1), lowmask);
  }
  return Philox4{c0, c1, c2, c3};
}

// (x - 1) + 2^-53 with x built as 0x3FF... | mant, mant = (a<<20)|(b>>12).
inline __m256d u53_4(__m256i a, __m256i b) {
  const __m256i mant = _mm256_or_si256(_mm256_slli_epi64(a, 20),
                                       _mm256_srli_epi64(b, 12));
  const __m256i bits =
      _mm256_or_si256(mant, _mm256_set1_epi64x(0x3FF0000000000000ll));
  const __m256d x = _mm256_castsi256_pd(bits);
  return _mm256_add_pd(_mm256_sub_pd(x, _mm256_set1_pd(1.0)),
                       _mm256_set1_pd(0x1p-53));
}

inline __m256d log_u_4(__m256d u) {
  const __m256i bits = _mm256_castpd_si256(u);
  __m256i ei = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52),
                                _mm256_set1_epi64x(1023));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
      _mm256_set1_epi64x(0x3FF0000000000000ll)));
  const __m256d big =
      _mm256_cmp_pd(m, _mm256_set1_pd(detail::SQRT2_THRESH), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  // mask lanes are all-ones (-1 as i64) where m was halved; subtracting adds 1
  ei = _mm256_sub_epi64(ei, _mm256_castpd_si256(big));
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d z = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(detail::LOGC[8]);
  for (int k = 7; k >= 0; --k)
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(detail::LOGC[k]));
  const __m256d lnm = _mm256_mul_pd(_mm256_add_pd(s, s), p);
  // exponents are small signed ints in u64 lanes; convert through memory
  alignas(32) long long etmp[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(etmp), ei);
  const __m256d ed = _mm256_set_pd(
      static_cast<double>(etmp[3]), static_cast<double>(etmp[2]),
      static_cast<double>(etmp[1]), static_cast<double>(etmp[0]));
  return _mm256_fmadd_pd(
      ed, _mm256_set1_pd(detail::LN2_LO),
      _mm256_fmadd_pd(ed, _mm256_set1_pd(detail::LN2_HI), lnm));
}

inline void sincos_2pi_unit_4(__m256d u, __m256d* sq, __m256d* cq) {
  const __m256d t = _mm256_mul_pd(_mm256_set1_pd(detail::TWO_PI), u);
  const __m256d kd = _mm256_round_pd(
      _mm256_mul_pd(t, _mm256_set1_pd(detail::TWO_OVER_PI)),
      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(detail::PIO2_HI), t);
  r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(detail::PIO2_LO), r);
  const __m128i q = _mm256_cvtpd_epi32(kd);  // quadrant per lane
  const __m256d z = _mm256_mul_pd(r, r);
  __m256d ps = _mm256_set1_pd(detail::SINC[6]);
  for (int k = 5; k >= 0; --k)
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(detail::SINC[k]));
  const __m256d sn = _mm256_fmadd_pd(_mm256_mul_pd(r, z), ps, r);
  __m256d pc = _mm256_set1_pd(detail::COSC[6]);
  for (int k = 5; k >= 0; --k)
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(detail::COSC[k]));
  const __m256d cs = _mm256_fmadd_pd(z, pc, _mm256_set1_pd(1.0));
  // quadrant selection: q&1 swaps sin/cos, bit patterns of (q+1)&2 / q&2 set signs
  alignas(16) int qi[4];
  _mm_store_si128(reinterpret_cast<__m128i*>(qi), q);
  alignas(32) double snl[4], csl[4], so[4], co[4];
  _mm256_store_pd(snl, sn);
  _mm256_store_pd(csl, cs);
  for (int lane = 0; lane < 4; ++lane) {
    switch (qi[lane] & 3) {
      case 0: so[lane] = snl[lane];  co[lane] = csl[lane];  break;
      case 1: so[lane] = csl[lane];  co[lane] = -snl[lane]; break;
      case 2: so[lane] = -snl[lane]; co[lane] = -csl[lane]; break;
      default: so[lane] = -csl[lane]; co[lane] = snl[lane]; break;
    }
  }
  *sq = _mm256_load_pd(so);
  *cq = _mm256_load_pd(co);
}

void normal_fill_avx2(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t base, double* out, std::size_t n) {
  std::uint64_t j = base;
  const std::uint64_t end = base + n;
  // leading edge: align to a pair boundary
  while (j < end && ((j & 1) != 0)) {
    double z0, z1;
    detail::normal_pair(seed, stream, j >> 1, &z0, &z1);
    out[j - base] = z1;
    ++j;
  }
  while (j + 8 <= end) {
    const Philox4 blk = philox_block4(seed, stream, j >> 1);
    const __m256d u1 = u53_4(blk.r0, blk.r1);
    const __m256d u2 = u53_4(blk.r2, blk.r3);
    const __m256d rad = _mm256_sqrt_pd(
        _mm256_mul_pd(_mm256_set1_pd(-2.0), log_u_4(u1)));
    __m256d sn, cs;
    sincos_2pi_unit_4(u2, &sn, &cs);
    const __m256d z0 = _mm256_mul_pd(rad, cs);
    const __m256d z1 = _mm256_mul_pd(rad, sn);
    alignas(32) double a0[4], a1[4];
    _mm256_store_pd(a0, z0);
    _mm256_store_pd(a1, z1);
    double* o = out + (j - base);
    o[0] = a0[0]; o[1] = a1[0];
    o[2] = a0[1]; o[3] = a1[1];
    o[4] = a0[2]; o[5] = a1[2];
    o[6] = a0[3]; o[7] = a1[3];
    j += 8;
  }
  while (j < end) {
    double z0, z1;
    detail::normal_pair(seed, stream, j >> 1, &z0, &z1);
    if ((j & 1) == 0) {
      out[j - base] = z0;
      if (j + 1 < end) out[j + 1 - base] = z1;
      j += 2;
    } else {
      out[j - base] = z1;
      j += 1;
    }
  }
}

void uniform_fill_avx2(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t base, double* out, std::size_t n) {
  std::uint64_t j = base;
  const std::uint64_t end = base + n;
  while (j < end && ((j & 1) != 0)) {
    double u1, u2;
    detail::uniform_pair(seed, stream, j >> 1, &u1, &u2);
    out[j - base] = u2;
    ++j;
  }
  while (j + 8 <= end) {
    const Philox4 blk = philox_block4(seed, stream, j >> 1);
    const __m256d u1 = u53_4(blk.r0, blk.r1);
    const __m256d u2 = u53_4(blk.r2, blk.r3);
    alignas(32) double a0[4], a1[4];
    _mm256_store_pd(a0, u1);
    _mm256_store_pd(a1, u2);
    double* o = out + (j - base);
    o[0] = a0[0]; o[1] = a1[0];
    o[2] = a0[1]; o[3] = a1[1];
    o[4] = a0[2]; o[5] = a1[2];
    o[6] = a0[3]; o[7] = a1[3];
    j += 8;
  }
  while (j < end) {
    double u1, u2;
    detail::uniform_pair(seed, stream, j >> 1, &u1, &u2);
    if ((j & 1) == 0) {
      out[j - base] = u1;
      if (j + 1 < end) out[j + 1 - base] = u2;
      j += 2;
    } else {
      out[j - base] = u2;
      j += 1;
    }
  }
}

}  // namespace

namespace detail_dispatch {

const Table kAvx2Table = {
    "avx2",        axpy_avx2,      xpay_avx2,     scal_avx2,
    dot_avx2,      sum_avx2,       reduce_min_avx2, reduce_max_avx2,
    stencil_avx2,  threshold_avx2, hadamard_avx2,
    normal_fill_avx2, uniform_fill_avx2};

const Table* avx2_table() { return &kAvx2Table; }

}  // namespace detail_dispatch

}  // namespace fieldperc::kernels

#else  // !__x86_64__

#include "kernels_detail.hpp"

namespace fieldperc::kernels::detail_dispatch {
const Table* avx2_table() { return nullptr; }
}  // namespace fieldperc::kernels::detail_dispatch

#endif
