#pragma once
// Excursion-set percolation on sampled fields: thresholding, cluster
// labeling, box-to-sphere crossings, Monte Carlo estimators for crossing
// probabilities and connectivity, threshold location, and the block-level
// good/bad events feeding the high-dimension slab argument.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fieldperc/gff.hpp"
#include "fieldperc/lattice.hpp"

namespace fieldperc::perc {

struct BinaryConfig {
  lattice::Window window;
  std::vector<std::uint8_t> open;  // 1 = site belongs to the excursion set
  double level = 0.0;

  bool at(const lattice::Point& p) const;  // false outside the window
};

// Sites of the window whose field value is at least h. Sitewise
// non-increasing in h on a fixed field.
BinaryConfig excursion_set(const gff::ScalarField& field, double h);

struct ClusterLabeling {
  lattice::Window window;
  std::vector<std::int32_t> label;             // -1 on closed sites
  std::vector<std::uint64_t> sizes;            // indexed by label
  std::vector<std::uint8_t> touches_boundary;  // cluster meets a window face

  std::size_t n_clusters() const { return sizes.size(); }
};

// Connected components of the open sites under nearest-neighbor adjacency,
// or *-adjacency when star is set. Labels are ranked by the smallest window
// index contained in the cluster, which makes the labeling deterministic.
ClusterLabeling label_clusters(const BinaryConfig& config, bool star);

// True when an open nearest-neighbor path joins an open site of `inner` to
// an open site of the sup-norm sphere bounding `outer`, staying inside
// `outer`. Any path in the full lattice realizing the event must first hit
// the sphere from inside, so the restriction is exact. `inner` must lie
// strictly inside `outer` and the config window must contain `outer`.
bool crossing(const BinaryConfig& config, const lattice::Box& inner,
              const lattice::Box& outer);

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  int d = 0;
  lattice::Coord L = 0;
  double h = 0.0;
  lattice::Coord margin = 0;
};

// P[B(0,L) <-> S(0,2L) in the level-h excursion set], field sampled with
// zero boundary on B(0, 2L + margin). Fixing the seed fixes the draws, so
// estimates at different levels are coupled monotonely.
McEstimate estimate_crossing(int d, lattice::Coord L, double h, std::size_t n,
                             std::uint64_t seed, lattice::Coord margin);

// Same event at several levels on one common set of draws.
std::vector<McEstimate> estimate_crossing_curve(int d, lattice::Coord L,
                                                const std::vector<double>& hs,
                                                std::size_t n,
                                                std::uint64_t seed,
                                                lattice::Coord margin);

// P[0 <-> S(0,radius)]: finite-window proxy for the density of the
// unbounded cluster.
McEstimate estimate_escape(int d, lattice::Coord radius, double h,
                           std::size_t n, std::uint64_t seed,
                           lattice::Coord margin);

// P[0 <-> x] inside B(0, |x|_inf + margin).
McEstimate estimate_connectivity(int d, const lattice::Point& x, double h,
                                 std::size_t n, std::uint64_t seed,
                                 lattice::Coord margin = 16);

// Left-right crossing of [0,L]^2 x {0} by open sites of the d=3 field
// restricted to the slice; the field is sampled on a 3-d window extending
// `margin` sites beyond the square in every direction.
McEstimate estimate_plane_crossing(lattice::Coord L, double h, std::size_t n,
                                   std::uint64_t seed, lattice::Coord margin);

struct DecayFit {
  std::vector<std::pair<lattice::Coord, double>> grid;
  double c = 0.0, cprime = 0.0, rho = 0.0;   // p ~ c exp(-c' L^rho)
  double poly_c = 0.0, poly_exponent = 0.0;  // p ~ c L^-k
  double sse_stretch = 0.0, sse_poly = 0.0;  // log-space residuals
  std::string tag;  // supercritical-like | polynomial-like |
                    // stretched-exponential-like | saturated
};

// Least-squares shape classification of a decay curve in log space over a
// rho grid in (0,1]. Only classifies; never asserts criticality. Degenerate
// all-0/all-1 input is tagged saturated, otherwise every estimate must be
// positive.
DecayFit fit_decay(
    const std::vector<std::pair<lattice::Coord, McEstimate>>& curve);

struct HstarReport {
  std::vector<lattice::Coord> sizes;
  std::vector<double> locus;     // per-size median crossing threshold
  std::vector<double> locus_se;  // order-statistic half-band
  double h_lo = 0.0, h_hi = 0.0;  // spread of the loci over the sizes
  double hstar_point = 0.0;       // locus at the largest size
  double tail_prob = 0.0;         // P[phi_0 >= hstar_point] for one site
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

// Level at which half the samples still cross: per sample, monotone
// bisection of the crossing threshold inside [h_min, h_max]; the locus of
// each size is the median of those thresholds. Throws when the bracket
// clips more than 5% of the samples. The sampling margin is one below the
// size, keeping the transform sizes composite.
HstarReport estimate_hstar(int d, const std::vector<lattice::Coord>& sizes,
                           double h_min, double h_max, std::size_t n,
                           std::uint64_t seed);

// The same machinery on an iid standard normal field, so thresholding at h
// plants iid Bernoulli sites with density equal to the normal tail of h.
HstarReport estimate_hstar_iid(int d,
                               const std::vector<lattice::Coord>& sizes,
                               double h_min, double h_max, std::size_t n,
                               std::uint64_t seed);

// Site-percolation threshold of the same crossing geometry on Z^3, located
// directly in the occupation parameter on iid uniform fields.
McEstimate pc_site_estimate(const std::vector<lattice::Coord>& sizes,
                            std::size_t n, std::uint64_t seed);

struct BlockFlags {
  bool f = false;  // largest cluster crosses the first two axes and is the
                   // only one of diameter >= L0-1
  bool g = false;  // the perturbation stays above -h on the block
  bool good() const { return f && g; }
  bool bad() const { return !(f && g); }
};

// Good/bad events of one renormalized block anchored at x in L0 Z^2 x {0}.
// F is evaluated on the excursion set {psi >= 2h} of the block box
// x + [0,2L0)^3 (largest cluster, ties broken toward the one holding the
// lexicographically smallest site); G asks min xi >= -h over the same box.
// Throws if the sample is missing any block site.
BlockFlags block_events(const gff::DecompositionSample& sample,
                        lattice::Coord l0, double h,
                        const lattice::Point& anchor);

// n x n block grid with row-major statuses (1 = bad). Decides whether the
// central 2x2 block square is surrounded by a *-circuit of bad blocks
// inside the grid, by planar duality: surrounded iff no nearest-neighbor
// path of good blocks joins the central square to the grid frame.
bool surrounded_by_bad_circuit(const std::vector<std::uint8_t>& bad, int n);

// MC frequency of the surrounding event with blocks declared bad by their
// level-h0 events on decomposition samples (d >= 6). The union of block
// boxes must stay within the dense-factorization site cap.
McEstimate bad_circuit_probe(int d, double h0, lattice::Coord l0,
                             int n_blocks, std::size_t n, std::uint64_t seed);

// Same surrounding event with iid Bernoulli(q) bad blocks, for calibration
// against counting bounds; the q used is reported in the h field.
McEstimate bad_circuit_probe_iid(double q, int n_blocks, std::size_t n,
                                 std::uint64_t seed);

}  // namespace fieldperc::perc
