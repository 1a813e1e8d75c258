#include "fieldperc/cg.hpp"

#include <cmath>
#include <vector>

#include "fieldperc/kernels.hpp"

namespace fieldperc::solve {

CgReport cg_solve(const lattice::SiteGraph& g, double c, const double* b,
                  double* u, double rel_tol, int max_iter) {
  namespace fk = fieldperc::kernels;
  const std::size_t n = g.n;
  CgReport rep;

  // work vectors carry one pad slot (index n) that stays zero so the stencil
  // can read missing neighbors from it
  std::vector<double> r(b, b + n);
  std::vector<double> p(n + 1, 0.0);
  std::vector<double> ap(n, 0.0);
  std::copy(r.begin(), r.end(), p.begin());
  for (std::size_t i = 0; i < n; ++i) u[i] = 0.0;

  const double bb = fk::dot(b, b, n);
  if (bb == 0.0) {
    rep.converged = true;
    return rep;
  }
  double rs = bb;
  for (int it = 0; it < max_iter; ++it) {
    fk::stencil_apply(p.data(), g.nb.data(), g.deg, c, ap.data(), n);
    const double pap = fk::dot(p.data(), ap.data(), n);
    const double alpha = rs / pap;
    fk::axpy(alpha, p.data(), u, n);
    fk::axpy(-alpha, ap.data(), r.data(), n);
    const double rs_new = fk::dot(r.data(), r.data(), n);
    rep.iterations = it + 1;
    rep.rel_residual = std::sqrt(rs_new / bb);
    if (rep.rel_residual < rel_tol) {
      rep.converged = true;
      return rep;
    }
    fk::xpay(r.data(), rs_new / rs, p.data(), n);
    rs = rs_new;
  }
  return rep;
}

}  // namespace fieldperc::solve
