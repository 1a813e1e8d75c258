#pragma once
// Simple-random-walk potential theory on Z^d: the full-space Green function
// by two independent methods (Bessel-product quadrature, the oracle of
// record, and a conjugate-gradient box solve with asymptotic boundary
// influx), the killed Green function, equilibrium measures and capacity,
// hitting probabilities, and the high-dimension scalars kappa, sigma^2 and
// the spectral radius bound.

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fieldperc/lattice.hpp"

namespace fieldperc::greens {

// Scaled modified Bessel ladder: out[k] = I_k(z) e^{-z} for k = 0..n_max,
// by Miller backward recurrence normalized with I_0 + 2 sum I_k = e^z.
void ive_ladder(double z, int n_max, double* out);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // abs error estimate
};

// g(x) = integral_0^inf prod_j ive(|x_j|, t/d) dt, adaptive GK15 on [0, d*zT]
// plus an 8-term analytic asymptotic tail. Requires d >= 3.
QuadResult green_quadrature(int d, const lattice::Point& x, double tol = 1e-9);

// Independent check: CG solve of (I - P_U) u = delta_0 + boundary influx on
// an l2-ball window, influx from the continuum asymptotics a_d |y|^{2-d}.
// Radius defaults per dimension (d=3: 60, d=4: 24, d=5: 12, d=6: 8).
QuadResult green_boxsolve(int d, const lattice::Point& x);
QuadResult green_boxsolve(int d, const lattice::Point& x, lattice::Coord radius);

// a_d = d Gamma(d/2 - 1) / (2 pi^{d/2}), the coefficient in g(x) ~ a_d |x|^{2-d}.
double green_asymptotic_coeff(int d);

// One box solve with the source at the origin, queryable at every point of
// the ball. green_boxsolve delegates here; build this directly when several
// displacements are needed from the same solve.
class BoxsolveField {
 public:
  BoxsolveField(int d, lattice::Coord radius);

  int dim() const { return d_; }
  lattice::Coord radius() const { return radius_; }
  QuadResult at(const lattice::Point& x) const;  // throws outside the ball

 private:
  int d_;
  lattice::Coord radius_;
  double err_ = 0.0;
  lattice::Window w_;
  std::vector<std::int32_t> from_window_;
  std::vector<double> u_;
};

// Table of g over all displacements with |x|_inf <= range, stored on
// canonical keys (absolute coordinates sorted descending; g is invariant
// under coordinate permutations and sign flips).
class GreenTable {
 public:
  GreenTable(int d, lattice::Coord range, double tol = 1e-9);

  int dim() const { return d_; }
  lattice::Coord range() const { return range_; }
  double at(const lattice::Point& x) const;
  double at0() const { return g0_; }
  double max_error() const { return max_error_; }

 private:
  int d_;
  lattice::Coord range_;
  double g0_ = 0.0;
  double max_error_ = 0.0;
  std::unordered_map<lattice::Point, double, lattice::PointHash> table_;
};

// Killed Green function g_U on a window subset (mask selects U; null = whole
// window). Columns by CG; dense inverse for small U.
class KilledGreen {
 public:
  KilledGreen(const lattice::Window& w, const std::uint8_t* mask = nullptr);

  const lattice::SiteGraph& graph() const { return graph_; }
  int dim() const { return d_; }

  // g_U(., y) for y given as compact index; length graph().n.
  std::vector<double> column(std::size_t y_compact, double rel_tol = 1e-12) const;

  // g_U(x, y) for lattice points; zero when either lies outside U.
  double value(const lattice::Point& x, const lattice::Point& y) const;

  // full n x n matrix, row-major; guarded to n <= 4000.
  std::vector<double> dense_matrix() const;

 private:
  const lattice::Window& w_;
  int d_;
  lattice::SiteGraph graph_;
};

double killed_green(const lattice::Window& w, const std::uint8_t* mask,
                    const lattice::Point& x, const lattice::Point& y);

// Equilibrium measure e_K and capacity via the last-exit identity:
// sum_{y in K} g(x,y) e_K(y) = 1 for x in K. Exact dense solve on K when
// |K| <= 200, otherwise on the inner boundary (where e_K is supported).
struct Equilibrium {
  std::vector<lattice::Point> sites;   // all of K, input order
  std::vector<double> weights;         // e_K per site (zero off the boundary)
  double capacity = 0.0;
};

Equilibrium equilibrium_and_capacity(const std::vector<lattice::Point>& K, int d);

// P_x[H_K < infty] = sum_y g(x,y) e_K(y); returns 1 for x in K.
double hitting_probability(const std::vector<lattice::Point>& K,
                           const lattice::Point& x, int d);

// Monte Carlo estimate of the same hitting probability by direct walks,
// truncated at l2 radius r_escape with an analytic continuation credit.
double hitting_probability_mc(const std::vector<lattice::Point>& K,
                              const lattice::Point& x, int d, std::size_t n,
                              std::uint64_t seed, double r_escape = 100.0);

// kappa(d) = P_0[no return of the Z^d walk to the Z^3 subspace]
//          = [ (d/(d-3)) g^{(d-3)}(0) ]^{-1}, d >= 6.
double kappa(int d);

// MC cross-check: embedded transverse walk on Z^{d-3} from a unit vector,
// absorbed at 0, escape declared past l2 radius r_escape.
double kappa_mc(int d, std::size_t n, std::uint64_t seed,
                double r_escape = 50.0);

struct HighDimScalars {
  int d = 0;
  double kappa = 0.0;
  double sigma2 = 0.0;     // 1 / (2 - kappa)
  double rho_bound = 0.0;  // 2 (1 - kappa) / (kappa (2 - kappa))
};

HighDimScalars highdim_scalars(int d);

// g'(v) = g_d(embed(v)) - sigma2 * [v == 0] for v in Z^3, the perturbation
// part of the covariance decomposition g = sigma^2 delta + g'.
class GPrimeTable {
 public:
  GPrimeTable(int d, lattice::Coord range, double tol = 1e-9);
  double at(const lattice::Point& v3) const;  // v3 in Z^3, |v3|_inf <= range
  const HighDimScalars& scalars() const { return scalars_; }

 private:
  HighDimScalars scalars_;
  lattice::Coord range_;
  std::unordered_map<lattice::Point, double, lattice::PointHash> table_;
};

}  // namespace fieldperc::greens
