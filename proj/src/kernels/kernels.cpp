// Scalar reference kernels and the runtime dispatch table.

#include "fieldperc/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "kernels_detail.hpp"

namespace fieldperc::kernels {

namespace {

constexpr std::size_t kChunk = 4096;  // reduction chunk grid

// ---- scalar reference implementations ----

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void xpay_scalar(const double* x, double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, y[i], x[i]);
}

void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot_chunk_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = std::fma(x[i], y[i], acc);
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double total = 0.0;
  for (std::size_t off = 0; off < n; off += kChunk) {
    const std::size_t len = (n - off < kChunk) ? n - off : kChunk;
    total += dot_chunk_scalar(x + off, y + off, len);
  }
  return total;
}

double sum_chunk_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double total = 0.0;
  for (std::size_t off = 0; off < n; off += kChunk) {
    const std::size_t len = (n - off < kChunk) ? n - off : kChunk;
    total += sum_chunk_scalar(x + off, len);
  }
  return total;
}

double reduce_min_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

double reduce_max_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

void stencil_scalar(const double* x, const std::int32_t* nb, int deg, double c,
                    double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t* row = nb + i * static_cast<std::size_t>(deg);
    double acc = 0.0;
    for (int k = 0; k < deg; ++k) acc += x[row[k]];
    y[i] = std::fma(-c, acc, x[i]);
  }
}

void threshold_scalar(const double* x, double h, std::uint8_t* out,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] >= h ? 1 : 0;
}

void hadamard_scalar(const double* z, const double* s, double* out,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = z[i] * s[i];
}

void normal_fill_scalar(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t base, double* out, std::size_t n) {
  std::uint64_t j = base;
  const std::uint64_t end = base + n;
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

void uniform_fill_scalar(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t base, double* out, std::size_t n) {
  std::uint64_t j = base;
  const std::uint64_t end = base + n;
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

// ---- dispatch table -------------------------------------------------------

namespace detail_dispatch {

const Table kScalarTable = {
    "scalar",        axpy_scalar,     xpay_scalar,   scal_scalar,
    dot_scalar,      sum_scalar,      reduce_min_scalar, reduce_max_scalar,
    stencil_scalar,  threshold_scalar, hadamard_scalar,
    normal_fill_scalar, uniform_fill_scalar};

std::atomic<const Table*> g_active{nullptr};

const Table* pick() {
  const char* env = std::getenv("FIELDPERC_FORCE_SCALAR");
  const bool forced = env != nullptr && env[0] == '1';
  if (!forced) {
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
      const Table* t = avx2_table();
      if (t != nullptr) return t;
    }
#endif
  }
  return &kScalarTable;
}

inline const Table& table() {
  const Table* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = pick();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace detail_dispatch

using detail_dispatch::table;

const char* active_isa() { return table().name; }

void force_scalar(bool on) {
  detail_dispatch::g_active.store(
      on ? &detail_dispatch::kScalarTable : detail_dispatch::pick(),
      std::memory_order_release);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  table().axpy(a, x, y, n);
}
void xpay(const double* x, double a, double* y, std::size_t n) {
  table().xpay(x, a, y, n);
}
void scal(double a, double* x, std::size_t n) { table().scal(a, x, n); }
double dot(const double* x, const double* y, std::size_t n) {
  return table().dot(x, y, n);
}
double nrm2sq(const double* x, std::size_t n) { return table().dot(x, x, n); }
double sum(const double* x, std::size_t n) { return table().sum(x, n); }
double reduce_min(const double* x, std::size_t n) { return table().rmin(x, n); }
double reduce_max(const double* x, std::size_t n) { return table().rmax(x, n); }
void stencil_apply(const double* x, const std::int32_t* nb, int deg, double c,
                   double* y, std::size_t n) {
  table().stencil(x, nb, deg, c, y, n);
}
void threshold_ge(const double* x, double h, std::uint8_t* out,
                  std::size_t n) {
  table().threshold(x, h, out, n);
}
void hadamard(const double* z, const double* s, double* out, std::size_t n) {
  table().hadamard(z, s, out, n);
}
void philox4x32(const std::uint32_t key[2], const std::uint32_t ctr[4],
                std::uint32_t out[4]) {
  const detail::U32x4 r =
      detail::philox_block(key[0], key[1], ctr[0], ctr[1], ctr[2], ctr[3]);
  out[0] = r.v[0];
  out[1] = r.v[1];
  out[2] = r.v[2];
  out[3] = r.v[3];
}
void normal_fill(std::uint64_t seed, std::uint64_t stream, std::uint64_t base,
                 double* out, std::size_t n) {
  table().normal_fill(seed, stream, base, out, n);
}
void uniform_fill(std::uint64_t seed, std::uint64_t stream, std::uint64_t base,
                  double* out, std::size_t n) {
  table().uniform_fill(seed, stream, base, out, n);
}

}  // namespace fieldperc::kernels
