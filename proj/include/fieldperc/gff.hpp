#pragma once
// Zero-boundary Gaussian free field samplers on finite windows of Z^d, the
// conditional (harmonic-extension) decomposition, and the high-dimension
// iid-plus-perturbation decomposition sampler on Z^3 slices.
//
// Normalization: the field covariance is the discrete-time walk Green
// function, Var(phi_0) = g_U(0,0) -> g(0) ~ 1.5164 on large d=3 windows.

#include <cstdint>
#include <functional>
#include <vector>

#include "fieldperc/greens.hpp"
#include "fieldperc/lattice.hpp"

namespace fieldperc::gff {

struct ScalarField {
  lattice::Window window;
  std::vector<double> values;  // one per window site, zero outside the domain
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  const char* sampler = "";
  const char* boundary = "zero";

  // field value with the zero-boundary convention outside the window
  double value(const lattice::Point& p) const;
};

// Field on a full box window drawn in the sine eigenbasis of I - P: exact in
// law, O(N log N) per draw through a type-I discrete sine transform. Holds
// its own transform buffers; use one instance per thread.
class BoxSampler {
 public:
  explicit BoxSampler(const lattice::Window& u);
  ~BoxSampler();
  BoxSampler(const BoxSampler&) = delete;
  BoxSampler& operator=(const BoxSampler&) = delete;

  const lattice::Window& window() const { return w_; }
  ScalarField draw(std::uint64_t seed, std::uint64_t stream);

 private:
  lattice::Window w_;
  std::vector<std::vector<double>> axis_cos_;  // cos(pi k/(m+1))/d per axis
  double norm_ = 0.0;
  double* buf_ = nullptr;
  void* plan_ = nullptr;
};

// Field on a masked subset U of a window: one standard normal per interior
// edge and per boundary deficiency, assembled so the forcing has covariance
// I - P_U, then a CG solve. Exact in law up to the solver tolerance.
class MaskedSampler {
 public:
  MaskedSampler(const lattice::Window& u, const std::uint8_t* mask);

  const lattice::Window& window() const { return w_; }
  const lattice::SiteGraph& graph() const { return g_; }
  ScalarField draw(std::uint64_t seed, std::uint64_t stream,
                   double rel_tol = 1e-10) const;

 private:
  lattice::Window w_;
  lattice::SiteGraph g_;
};

// Convenience dispatcher: eigenbasis sampler on full boxes, CG sampler when
// a mask is given.
ScalarField sample_gff(const lattice::Window& u, std::uint64_t seed,
                       std::uint64_t stream = 0,
                       const std::uint8_t* mask = nullptr);

// Harmonic extension of boundary data on a finite set K:
// mu_x = E_x[phi at the hitting site of K; hit K], evaluated through the
// last-exit identity mu_x = g(x,.)|_K G_K^{-1} phi. In particular mu_x equals
// the boundary value for x in K, and mu is linear in the boundary data.
class ConditionalShift {
 public:
  ConditionalShift(std::vector<lattice::Point> k, std::vector<double> boundary,
                   int d);

  double at(const lattice::Point& x) const;
  const std::vector<double>& dual_weights() const { return w_; }

 private:
  int d_;
  std::vector<lattice::Point> k_;
  std::vector<double> boundary_;
  std::vector<double> w_;  // G_K^{-1} boundary
};

// m_x(alpha): the shift for constant boundary level alpha on K.
double conditional_shift_constant(const std::vector<lattice::Point>& k,
                                  const lattice::Point& x, int d,
                                  double alpha);

struct CovProbe {
  lattice::Point x;
  lattice::Point y;
  double measured = 0.0;
  double expected = 0.0;
  double se = 0.0;
  bool pass = false;
};

struct DecompositionReport {
  double max_abs_correlation = 0.0;  // between phi-tilde on U and phi on K
  double correlation_bound = 0.0;    // 4/sqrt(n)
  double max_k_residual = 0.0;       // max |phi-tilde| on K over all samples
  std::vector<CovProbe> probes;      // Cov(phi-tilde) against the killed green
  bool pass = false;
};

// Samples the zero-boundary field on the window, splits phi = phi-tilde + mu
// with mu the in-window harmonic extension of phi|_K, and verifies that
// phi-tilde vanishes on K, decorrelates from phi|_K, and has the killed
// Green covariance of the window minus K.
DecompositionReport conditional_decomposition_check(
    const lattice::Window& w, const std::vector<lattice::Point>& k,
    std::size_t n_samples, std::uint64_t seed);

struct DecompositionSample {
  std::vector<lattice::Point> sites;  // subset of Z^3
  std::vector<double> psi;            // iid N(0, sigma2(d))
  std::vector<double> xi;             // covariance g' restricted to sites
  greens::HighDimScalars scalars;
  double jitter = 0.0;
};

// psi + xi has the law of the d-dimensional field restricted to a Z^3 slice.
// xi uses a dense symmetric factorization of the g' covariance with jitter
// capped at 1e-10; a matrix that is not PSD within the cap is a hard error.
class DecompositionSampler {
 public:
  DecompositionSampler(int d, std::vector<lattice::Point> a);

  DecompositionSample draw(std::uint64_t seed, std::uint64_t stream) const;
  const greens::HighDimScalars& scalars() const { return scalars_; }
  double jitter() const { return jitter_; }

 private:
  std::vector<lattice::Point> a_;
  greens::HighDimScalars scalars_;
  double jitter_ = 0.0;
  std::vector<double> chol_;  // lower factor, row-major
};

DecompositionSample sample_decomposition(int d,
                                         const std::vector<lattice::Point>& a,
                                         std::uint64_t seed);

struct FkgReport {
  double p_equal = 0.0;  // P[A | phi = alpha on K]
  double se_equal = 0.0;
  double p_above = 0.0;  // P[A | phi >= alpha on K], by rejection
  double se_above = 0.0;
  std::size_t n_equal = 0;
  std::size_t n_above_accepted = 0;
  bool inconclusive = false;  // rejection kept too few samples
  bool pass = false;          // p_equal <= p_above + 4 combined SE
};

// Monte Carlo form of the conditioning inequality for increasing events:
// pinning the field to alpha on K is dominated by conditioning it to exceed
// alpha there. The evaluator must be increasing in the field values.
FkgReport fkg_mc_check(
    const lattice::Window& w, const std::vector<lattice::Point>& k,
    const std::function<bool(const ScalarField&)>& increasing_event,
    double alpha, std::size_t n_samples, std::uint64_t seed);

}  // namespace fieldperc::gff
