#pragma once
// Compute kernels with runtime ISA dispatch.
//
// Every entry point has a scalar reference implementation; on x86-64 with
// AVX2+FMA a vector variant is selected at startup. Elementwise kernels
// (threshold, hadamard, normal/uniform fills, philox) are bit-identical
// across variants because both paths evaluate the same polynomial schemes
// with the same fma placement. Reductions (dot, sum, ...) accumulate over a
// fixed chunk grid, so their results never depend on how callers slice work,
// but they are only tolerance-equal across ISAs.

#include <cstddef>
#include <cstdint>

namespace fieldperc::kernels {

// Name of the dispatch target in effect: "scalar" or "avx2".
const char* active_isa();

// Force the scalar reference path (test hook). Also honored at startup via
// environment variable FIELDPERC_FORCE_SCALAR=1.
void force_scalar(bool on);

// ---- blas-1 style -------------------------------------------------------
void axpy(double a, const double* x, double* y, std::size_t n);  // y += a*x
void xpay(const double* x, double a, double* y, std::size_t n);  // y = x + a*y
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double nrm2sq(const double* x, std::size_t n);
double sum(const double* x, std::size_t n);
double reduce_min(const double* x, std::size_t n);
double reduce_max(const double* x, std::size_t n);

// ---- lattice precision stencil ------------------------------------------
// y[i] = x[i] - c * sum_{k<deg} x[nb[i*deg+k]].
// Fixed-degree adjacency; missing neighbors point at a pad slot that holds
// 0.0 (callers allocate x with that extra slot at index n).
void stencil_apply(const double* x, const std::int32_t* nb, int deg, double c,
                   double* y, std::size_t n);

// ---- elementwise ----------------------------------------------------------
void threshold_ge(const double* x, double h, std::uint8_t* out, std::size_t n);
void hadamard(const double* z, const double* s, double* out, std::size_t n);

// ---- counter-based randomness ---------------------------------------------
// Philox-4x32-10 block function (Salmon et al., SC'11 constants).
void philox4x32(const std::uint32_t key[2], const std::uint32_t ctr[4],
                std::uint32_t out[4]);

// Deterministic fills: element i of the output is a pure function of
// (seed, stream, base + i). Slicing a range across calls or threads yields
// byte-identical results. normal_fill produces standard normals (Box-Muller
// on 53-bit uniforms), uniform_fill produces doubles in (0,1).
void normal_fill(std::uint64_t seed, std::uint64_t stream, std::uint64_t base,
                 double* out, std::size_t n);
void uniform_fill(std::uint64_t seed, std::uint64_t stream, std::uint64_t base,
                  double* out, std::size_t n);

}  // namespace fieldperc::kernels
