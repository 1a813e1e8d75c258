// Deterministic arithmetic for the multi-scale certification pipeline:
// exact dyadic scale towers, descendant-tree counting, the coupled
// (beta_n, h_n, K_n) recursions with log-space probability bounds, seed
// bounds for the base scale, perturbation tail bounds, contour sums, and
// the dimension search for slab percolation.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fieldperc::renorm {

// One named constant together with a record of where its number came from.
// provenance is one of "paper-symbolic", "numeric-default", "user-supplied".
struct LedgerEntry {
  double value = 0.0;
  std::string provenance;
  std::string note;
};

// Every constant that enters a recursion lives here, so a trace can always
// be audited against the exact inputs that produced it.
struct ConstantsLedger {
  LedgerEntry c0;          // branching-ratio constant from descendant counting
  LedgerEntry c1;          // sprinkling constant of the level increments
  LedgerEntry c2;          // multiplier bounding the expected field maximum
  LedgerEntry B;           // 3 / (1 - e^{-1}), cap on the total K_n drop
  LedgerEntry g0;          // walk Green function at the origin
  LedgerEntry cap_ratio;   // capacity(box of side 3 L0) / L0^{d-2}
  LedgerEntry green_sup;   // sup over x != 0 of g(x) |x|_inf^{d-2}
  LedgerEntry separation;  // 1/2 - 4/l0, relative gap between box unions

  // Computes numeric defaults for dimension d and scale parameters (L0, l0).
  // Results are cached per (d, L0, l0); safe to call from several threads.
  static ConstantsLedger defaults(int d, long L0, long l0);
};

// Scale geometry and seed level for one certification run. The ledger must
// outlive the config. Recursion operations require l0 >= 100; the counting
// operations accept any l0 >= 4.
struct RenormConfig {
  int d = 3;
  long L0 = 10;
  long l0 = 100;
  double h0 = 1.0;
  const ConstantsLedger* ledger = nullptr;
};

// Exact side length l0^n * L0 of the level-n box, as a decimal string.
std::string scales(const RenormConfig& cfg, int n);

// Counting report for the trees of depth n rooted at one level-n box.
struct TreeCount {
  double log_bound = 0.0;   // log of (c0 l0^{2(d-1)})^{2^n} with the ledger c0
  double bound = 0.0;       // same in linear scale, +inf once it overflows
  std::uint64_t h1 = 0;     // boxes of the next level down meeting the
                            // inner boundary of their parent
  std::vector<std::uint64_t> h2;  // per level k = 1..n, boxes meeting the
                                  // half-scale separation shell
  std::optional<std::string> exact;  // exact tree count when enumerable
  std::string exact_note;            // reason when exact is absent
};

// Counts descendant trees. Exact counting is attempted for n <= exact_upto
// (capped at 3) and succeeds when the descendant clusters of distinct nodes
// are provably disjoint, making the per-node product count exact. Throws
// when exact_upto asks for a depth beyond the enumeration cap.
TreeCount tree_counts(const RenormConfig& cfg, int n, int exact_upto = 3);

// log(2 c0 l0^{2(d-1)}) + B, the starting value of the K recursion.
double k0_constant(const RenormConfig& cfg);

// c2 sqrt(log(2^n (3 L0)^d)), the bound on the scaled expected maximum of
// the field over the n-th test geometry.
double m_bound(const RenormConfig& cfg, int n);

// beta_n = sqrt(log 2) + m_bound(n) + 2^{(n+1)/2} (sqrt(n) + sqrt(K0)),
// for n = 0..n_max.
std::vector<double> beta_sequence(const RenormConfig& cfg, int n_max);

struct LevelSequence {
  std::vector<double> h;  // h_0 .. h_{n_max}
  double h_infinity = 0.0;
};

// Level tower h_{n+1} = h_n + c1 beta_n (2 l0^{-(d-2)})^{n+1} and its limit.
// The increments are geometrically dominated (ratio at most 4 l0^{-(d-2)}),
// so the limit is summed to double precision.
LevelSequence h_sequence(const RenormConfig& cfg, int n_max);

// K_0 = k0_constant and
// K_{n+1} = K_n - log(1 + e^{K_n} 3^{2^{-(n+1)}} e^{-2^{-(n+1)}(beta_n - M_n)^2}).
// Checks K0 - B <= K_n <= K0 and the doubling chain
// e^{-K_n 2^n} squared plus 3 e^{-(beta_n - M_n)^2} <= e^{-K_{n+1} 2^{n+1}}.
std::vector<double> k_sequence(const RenormConfig& cfg, int n_max);

// A bound or estimate on the base-scale crossing probability, in log scale.
// provenance "analytic" marks a derived bound, "mc" a Monte Carlo estimate.
struct SeedBound {
  double log_p0 = 0.0;
  std::string provenance = "analytic";
};

struct RecursionTrace {
  std::vector<std::string> L_n;   // exact side lengths per level
  std::vector<double> M_n;
  std::vector<double> beta_n;
  std::vector<double> h_n;
  std::vector<double> K_n;
  std::vector<double> log_p_n;    // log upper bounds on the crossing
                                  // probability at level n (empty when the
                                  // seed gate fails)
  double h_infinity = 0.0;
  double K0 = 0.0;
  double log_p0 = 0.0;
  bool valid = false;
  std::string provenance;
};

// Runs the full recursion from a seed bound. The gate is log_p0 <= -K0;
// when it fails the trace carries the scale data but no probability claims
// and valid stays false. A certificate from an analytic seed is labeled
// "analytic-conditional", one from an MC seed "empirical".
RecursionTrace certify_from_seed(const RenormConfig& cfg,
                                 const SeedBound& seed, int n_max = 16);

// Gaussian bound on the base-scale seed: with |K| = (3 L0)^d sites,
// A = sqrt(2 g(0) log|K|) and Emax = A + g(0)/A, returns
// exp(-(h0 - Emax)^2 / (2 g(0))). Throws "increase h0" when h0 <= Emax.
double p0_upper_bound(const RenormConfig& cfg);

enum class Direction { increasing, decreasing };

// Iterates q_{n+1} = q_n^2 + 3 e^{-(beta_n - M_n)^2} from q0, the shared
// arithmetic core of the certification. An exactly zero q_n propagates as
// zero: impossible events stay impossible under the tree decomposition.
// Direction only reflects the reported level tower; decreasing events are
// handled by flipping the field, which negates the level increments.
RecursionTrace generic_recursion(const RenormConfig& cfg, double q0,
                                 Direction dir, int n_max = 16);

// log 2 / log l0, the exponent tying dyadic depth to the scale ratio.
double rho_exponent(long l0);

// sqrt(2 e u) e^{-u}; (0,1)-valued and strictly decreasing for u > 1/2.
double vtilde(double u);

// Bound on the probability that the perturbation field exceeds h in
// absolute value on every site of a set of a_count sites:
// vtilde(h^2 / (2 rho_bound(d)))^{a_count}. Requires the argument to lie
// in the decreasing regime u > 1/2, else throws "regime not applicable".
double xi_tail_bound(int d, double h, int a_count);

// Exact contour sum 8^n sum_k C(n,k) 40^{-k} 40^{-(n-k)} = (2/5)^n,
// evaluated in exact integer arithmetic; checked against 2^{-n}.
double peierls_sum(int n);

// Exact geometric tail sum_{n >= n0} (2/5)^n = (2/5)^{n0} * 5/3.
double peierls_tail(int n0);

// One verdict of the slab pipeline. kind is "analytic" for gates evaluated
// from formulas and "empirical" for Monte Carlo counterparts.
struct SlabGate {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool satisfied = false;
  std::string kind;
  std::string note;
};

struct SlabOptions {
  std::optional<double> pc_site;    // supply to skip the built-in estimator
  std::vector<long> pc_sizes = {4, 6, 8};
  std::size_t pc_samples = 200;
  std::size_t mc_samples = 1500;    // per empirical gate
  std::uint64_t seed = 1;
  bool run_mc = true;
  int mc_dim_cap = 2000;            // skip the perturbation MC beyond this d
};

struct SlabReport {
  int d0 = -1;              // smallest dimension passing the tail gate
  double h0 = 0.0;
  long L0 = 0;
  double pc_site = 0.0;
  std::string pc_site_provenance;  // "estimated" or "user-supplied"
  double target_p = 0.0;    // (1/2)(1/2 + pc_site), the density the
                            // dominant field must reach at level 2 h0
  double seed_level_p = 0.0;       // upper tail of N(0, 1/2) at 2 h0
  std::vector<SlabGate> gates;
  std::string message;      // "ok" or "h0 too small for this L0"
};

// Searches d in [6, 10^6] for the smallest dimension where
// (2 L0)^3 vtilde(h0^2 / (2 rho_bound(d)))^{1/4} <= 1/40, then reports the
// analytic gates of the slab argument together with Monte Carlo
// counterparts for the block events. Dimensions where the tail bound is
// outside its regime count as failing the gate.
SlabReport slab_pipeline(double h0, long L0, const SlabOptions& opts = {});

}  // namespace fieldperc::renorm
