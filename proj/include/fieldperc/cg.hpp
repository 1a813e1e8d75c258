#pragma once
// Conjugate gradient for systems (I - c*Adj) u = b over a SiteGraph, where
// Adj is the masked nearest-neighbor adjacency (neighbors outside the graph
// contribute zero). The operator is symmetric positive definite for
// c <= 1/deg on any finite graph with at least one absorbing deficiency.

#include <cstddef>

#include "fieldperc/lattice.hpp"

namespace fieldperc::solve {

struct CgReport {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// b and u have g.n entries; u is overwritten with the solution (initial
// guess zero). Deterministic: fixed iteration order, chunked reductions.
CgReport cg_solve(const lattice::SiteGraph& g, double c, const double* b,
                  double* u, double rel_tol = 1e-10, int max_iter = 100000);

}  // namespace fieldperc::solve
