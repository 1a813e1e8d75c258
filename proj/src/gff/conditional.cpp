#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fieldperc/cg.hpp"
#include "fieldperc/gff.hpp"
#include "fieldperc/stats.hpp"

namespace fieldperc::gff {

namespace {

// pick a point of the window that avoids K, walking along the first axis
lattice::Point avoid_k(const lattice::Window& w, lattice::Point p,
                       const lattice::PointSet& kset) {
  while (kset.count(p)) {
    p[0] += 1;
    if (!w.contains(p))
      throw std::invalid_argument("probe selection ran out of window");
  }
  return p;
}

}  // namespace

ConditionalShift::ConditionalShift(std::vector<lattice::Point> k,
                                   std::vector<double> boundary, int d)
    : d_(d), k_(std::move(k)), boundary_(std::move(boundary)) {
  if (k_.empty()) throw std::invalid_argument("ConditionalShift: empty set");
  if (k_.size() != boundary_.size())
    throw std::invalid_argument("ConditionalShift: size mismatch");
  const Eigen::Index m = static_cast<Eigen::Index>(k_.size());
  Eigen::MatrixXd G(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double v =
          greens::green_quadrature(
              d_, lattice::sub(k_[static_cast<std::size_t>(i)],
                               k_[static_cast<std::size_t>(j)]))
              .value;
      G(i, j) = v;
      G(j, i) = v;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("ConditionalShift: Green matrix not PD");
  Eigen::Map<const Eigen::VectorXd> b(boundary_.data(), m);
  const Eigen::VectorXd sol = llt.solve(b);
  w_.assign(sol.data(), sol.data() + m);
}

double ConditionalShift::at(const lattice::Point& x) const {
  for (std::size_t i = 0; i < k_.size(); ++i)
    if (k_[i] == x) return boundary_[i];
  double mu = 0.0;
  for (std::size_t i = 0; i < k_.size(); ++i)
    mu += greens::green_quadrature(d_, lattice::sub(x, k_[i])).value * w_[i];
  return mu;
}

double conditional_shift_constant(const std::vector<lattice::Point>& k,
                                  const lattice::Point& x, int d,
                                  double alpha) {
  return alpha * greens::hitting_probability(k, x, d);
}

DecompositionReport conditional_decomposition_check(
    const lattice::Window& w, const std::vector<lattice::Point>& k,
    std::size_t n_samples, std::uint64_t seed) {
  if (k.empty())
    throw std::invalid_argument("conditional_decomposition_check: empty K");
  for (const auto& p : k)
    if (!w.contains(p))
      throw std::invalid_argument(
          "conditional_decomposition_check: K outside window");
  const lattice::PointSet kset(k.begin(), k.end());

  // columns of the window Green function at the K sites
  const greens::KilledGreen kgw(w);
  const std::size_t nk = k.size();
  std::vector<std::vector<double>> cols(nk);
  std::vector<std::size_t> kidx(nk);
  for (std::size_t j = 0; j < nk; ++j) {
    kidx[j] =
        static_cast<std::size_t>(kgw.graph().from_window[w.index(k[j])]);
    cols[j] = kgw.column(kidx[j], 1e-12);
  }
  Eigen::MatrixXd gk(static_cast<Eigen::Index>(nk),
                     static_cast<Eigen::Index>(nk));
  for (std::size_t i = 0; i < nk; ++i)
    for (std::size_t j = 0; j < nk; ++j)
      gk(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cols[j][kidx[i]];
  const Eigen::LLT<Eigen::MatrixXd> llt(gk);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "conditional_decomposition_check: K Green matrix not PD");

  // killed green of the window minus K, the expected phi-tilde covariance
  std::vector<std::uint8_t> mask(w.size(), 1);
  for (std::size_t j = 0; j < nk; ++j) mask[w.index(k[j])] = 0;
  const greens::KilledGreen kgu(w, mask.data());

  // deterministic probe geometry
  const lattice::Box& box = w.box();
  lattice::Point center(box.lo);
  for (int a = 0; a < w.dim(); ++a)
    center[static_cast<std::size_t>(a)] =
        (box.lo[static_cast<std::size_t>(a)] +
         box.hi[static_cast<std::size_t>(a)]) /
        2;
  const lattice::Point p1 = avoid_k(w, box.lo, kset);
  const lattice::Point p2 = avoid_k(w, center, kset);
  lattice::Point p3n(p2);
  p3n[0] += 1;
  const lattice::Point p3 = avoid_k(w, p3n, kset);

  struct ProbePair {
    lattice::Point x, y;
    std::size_t cx, cy;  // compacts in the full-window graph
  };
  std::vector<ProbePair> pairs;
  for (const auto& [x, y] :
       std::vector<std::pair<lattice::Point, lattice::Point>>{
           {p1, p1}, {p2, p2}, {p2, p3}}) {
    pairs.push_back(
        {x, y,
         static_cast<std::size_t>(kgw.graph().from_window[w.index(x)]),
         static_cast<std::size_t>(kgw.graph().from_window[w.index(y)])});
  }

  DecompositionReport rep;
  rep.correlation_bound = 4.0 / std::sqrt(static_cast<double>(n_samples));

  std::vector<stats::Accumulator> prod(pairs.size());
  // correlation accumulators: phi-tilde at probes against phi on K
  const std::vector<lattice::Point> usites{p1, p2, p3};
  std::vector<std::size_t> uidx;
  for (const auto& p : usites)
    uidx.push_back(
        static_cast<std::size_t>(kgw.graph().from_window[w.index(p)]));
  std::vector<stats::Accumulator> cross(usites.size() * nk);
  std::vector<stats::Accumulator> usq(usites.size()), ksq(nk);

  BoxSampler bs(w);
  Eigen::VectorXd phik(static_cast<Eigen::Index>(nk));
  const auto mu_at = [&](const Eigen::VectorXd& wts, std::size_t compact) {
    double m = 0.0;
    for (std::size_t j = 0; j < nk; ++j)
      m += cols[j][compact] * wts(static_cast<Eigen::Index>(j));
    return m;
  };

  for (std::size_t s = 0; s < n_samples; ++s) {
    const ScalarField f = bs.draw(seed, s);
    for (std::size_t j = 0; j < nk; ++j)
      phik(static_cast<Eigen::Index>(j)) = f.value(k[j]);
    const Eigen::VectorXd wts = llt.solve(phik);

    for (std::size_t j = 0; j < nk; ++j) {
      const double resid =
          std::abs(f.value(k[j]) - mu_at(wts, kidx[j]));
      rep.max_k_residual = std::max(rep.max_k_residual, resid);
    }
    std::vector<double> tilde(usites.size());
    for (std::size_t t = 0; t < usites.size(); ++t)
      tilde[t] = f.value(usites[t]) - mu_at(wts, uidx[t]);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      double tx = 0.0, ty = 0.0;
      for (std::size_t t = 0; t < usites.size(); ++t) {
        if (uidx[t] == pairs[p].cx) tx = tilde[t];
        if (uidx[t] == pairs[p].cy) ty = tilde[t];
      }
      prod[p].add(tx * ty);
    }
    for (std::size_t t = 0; t < usites.size(); ++t) {
      usq[t].add(tilde[t] * tilde[t]);
      for (std::size_t j = 0; j < nk; ++j) {
        cross[t * nk + j].add(tilde[t] * phik(static_cast<Eigen::Index>(j)));
        if (t == 0) ksq[j].add(phik(static_cast<Eigen::Index>(j)) *
                               phik(static_cast<Eigen::Index>(j)));
      }
    }
  }

  bool ok = rep.max_k_residual <= 1e-8;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    CovProbe cp;
    cp.x = pairs[p].x;
    cp.y = pairs[p].y;
    cp.measured = prod[p].mean();
    cp.expected = kgu.value(pairs[p].x, pairs[p].y);
    cp.se = prod[p].se_mean();
    cp.pass = std::abs(cp.measured - cp.expected) <= 4.0 * cp.se;
    ok = ok && cp.pass;
    rep.probes.push_back(cp);
  }
  for (std::size_t t = 0; t < usites.size(); ++t)
    for (std::size_t j = 0; j < nk; ++j) {
      const double denom =
          std::sqrt(usq[t].mean() * ksq[j].mean());
      if (denom == 0.0) continue;
      const double r = cross[t * nk + j].mean() / denom;
      rep.max_abs_correlation = std::max(rep.max_abs_correlation, std::abs(r));
    }
  ok = ok && rep.max_abs_correlation <= rep.correlation_bound;
  rep.pass = ok;
  return rep;
}

FkgReport fkg_mc_check(
    const lattice::Window& w, const std::vector<lattice::Point>& k,
    const std::function<bool(const ScalarField&)>& increasing_event,
    double alpha, std::size_t n_samples, std::uint64_t seed) {
  if (k.empty() || n_samples == 0)
    throw std::invalid_argument("fkg_mc_check: empty K or no samples");
  const int d = w.dim();
  const lattice::PointSet kset(k.begin(), k.end());

  std::vector<std::uint8_t> mask(w.size(), 1);
  for (const auto& p : k) mask[w.index(p)] = 0;
  const MaskedSampler ms(w, mask.data());
  const lattice::SiteGraph& g = ms.graph();

  // harmonic extension of 1 on K, zero outside the window: one CG solve
  std::vector<double> b(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    const lattice::Point p = w.point(g.to_window[i]);
    int in_k = 0;
    for (const auto& q : lattice::neighbors(p, false))
      if (kset.count(q)) ++in_k;
    if (in_k > 0)
      b[i] = static_cast<double>(in_k) / (2.0 * static_cast<double>(d));
  }
  std::vector<double> v(g.n, 0.0);
  if (!solve::cg_solve(g, 1.0 / (2.0 * static_cast<double>(d)), b.data(),
                       v.data(), 1e-11)
           .converged)
    throw std::runtime_error("fkg_mc_check: CG failed on the shift");

  FkgReport rep;
  rep.n_equal = n_samples;

  std::size_t hits_eq = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    ScalarField f = ms.draw(seed, s);
    for (std::size_t i = 0; i < g.n; ++i)
      f.values[g.to_window[i]] += alpha * v[i];
    for (const auto& p : k) f.values[w.index(p)] = alpha;
    if (increasing_event(f)) ++hits_eq;
  }
  rep.p_equal = static_cast<double>(hits_eq) / static_cast<double>(n_samples);
  rep.se_equal = stats::bernoulli_se(rep.p_equal, n_samples);

  BoxSampler bs(w);
  std::size_t accepted = 0, hits_ge = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const ScalarField f = bs.draw(seed, n_samples + s);
    bool all_above = true;
    for (const auto& p : k)
      if (f.value(p) < alpha) {
        all_above = false;
        break;
      }
    if (!all_above) continue;
    ++accepted;
    if (increasing_event(f)) ++hits_ge;
  }
  rep.n_above_accepted = accepted;
  rep.inconclusive = accepted < 100;
  if (accepted > 0) {
    rep.p_above = static_cast<double>(hits_ge) / static_cast<double>(accepted);
    rep.se_above = stats::bernoulli_se(rep.p_above, accepted);
  }
  const double combined =
      std::sqrt(rep.se_equal * rep.se_equal + rep.se_above * rep.se_above);
  rep.pass = !rep.inconclusive && rep.p_equal <= rep.p_above + 4.0 * combined;
  return rep;
}

}  // namespace fieldperc::gff
