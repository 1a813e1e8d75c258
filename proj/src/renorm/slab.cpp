// Perturbation tail bounds, exact contour sums, and the dimension search
// for slab percolation of the excursion set.
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldperc/gff.hpp"
#include "fieldperc/greens.hpp"
#include "fieldperc/kernels.hpp"
#include "fieldperc/lattice.hpp"
#include "fieldperc/perc.hpp"
#include "fieldperc/renorm.hpp"
#include "fieldperc/stats.hpp"

#include "internal.hpp"

namespace fieldperc::renorm {

namespace {

const greens::HighDimScalars& scalars_for(int d) {
  static std::mutex mu;
  static std::map<int, greens::HighDimScalars> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end())
    it = cache.emplace(d, greens::highdim_scalars(d)).first;
  return it->second;
}

double to_double_ratio(const detail::BigInt& num, const detail::BigInt& den) {
  const detail::BigInt cap = detail::pow_big(10, 300);
  if (num < cap && den < cap)
    return num.convert_to<double>() / den.convert_to<double>();
  return std::exp(detail::log_big(num) - detail::log_big(den));
}

}  // namespace

double vtilde(double u) {
  if (!(u > 0.0)) throw std::invalid_argument("vtilde: need u > 0");
  return std::sqrt(2.0 * std::exp(1.0) * u) * std::exp(-u);
}

double xi_tail_bound(int d, double h, int a_count) {
  if (d < 6) throw std::invalid_argument("xi_tail_bound: need d >= 6");
  if (a_count < 1)
    throw std::invalid_argument("xi_tail_bound: need a_count >= 1");
  const double rb = scalars_for(d).rho_bound;
  const double u = h * h / (2.0 * rb);
  if (!(u > 0.5))
    throw std::domain_error(
        "xi_tail_bound: regime not applicable (need h^2 > rho_bound(d))");
  return std::pow(vtilde(u), static_cast<double>(a_count));
}

double peierls_sum(int n) {
  if (n < 1) throw std::invalid_argument("peierls_sum: need n >= 1");
  if (n > 5000) throw std::invalid_argument("peierls_sum: n cap exceeded");
  // Contour count 8^n times the sum over the ways to split n blocks
  // between the two failure modes, each factor worth 1/40.
  detail::BigInt binom_sum = 0;
  detail::BigInt c = 1;
  for (int k = 0; k <= n; ++k) {
    binom_sum += c;
    c = c * (n - k) / (k + 1);
  }
  const detail::BigInt num = detail::pow_big(8, n) * binom_sum;
  const detail::BigInt den = detail::pow_big(40, n);
  // num/den must reduce to (2/5)^n and stay below 2^{-n}.
  if (num * detail::pow_big(5, n) != den * detail::pow_big(2, n))
    throw std::logic_error("peierls_sum: sum does not reduce to (2/5)^n");
  if (num * detail::pow_big(2, n) >= den)
    throw std::logic_error("peierls_sum: contour sum not below 2^{-n}");
  return to_double_ratio(num, den);
}

double peierls_tail(int n0) {
  if (n0 < 1) throw std::invalid_argument("peierls_tail: need n0 >= 1");
  if (n0 > 5000) throw std::invalid_argument("peierls_tail: n0 cap exceeded");
  const detail::BigInt num = detail::pow_big(2, n0) * 5;
  const detail::BigInt den = detail::pow_big(5, n0) * 3;
  return to_double_ratio(num, den);
}

namespace {

// (2 L0)^3 vtilde(h0^2 / (2 rho_bound(d)))^{1/4}, or +inf when the tail
// bound is outside its decreasing regime at this dimension.
double tail_gate_value(double h0, long L0, int d) {
  const double rb = scalars_for(d).rho_bound;
  const double u = h0 * h0 / (2.0 * rb);
  if (!(u > 0.5)) return std::numeric_limits<double>::infinity();
  const double vol = std::pow(2.0 * static_cast<double>(L0), 3);
  return vol * std::pow(vtilde(u), 0.25);
}

}  // namespace

SlabReport slab_pipeline(double h0, long L0, const SlabOptions& opts) {
  if (!(h0 > 0.0)) throw std::invalid_argument("slab_pipeline: need h0 > 0");
  if (L0 < 1) throw std::invalid_argument("slab_pipeline: need L0 >= 1");

  SlabReport rep;
  rep.h0 = h0;
  rep.L0 = L0;

  if (opts.pc_site) {
    if (!(*opts.pc_site > 0.0 && *opts.pc_site < 1.0))
      throw std::invalid_argument("slab_pipeline: pc_site must lie in (0,1)");
    rep.pc_site = *opts.pc_site;
    rep.pc_site_provenance = "user-supplied";
  } else {
    std::vector<lattice::Coord> sizes(opts.pc_sizes.begin(),
                                      opts.pc_sizes.end());
    rep.pc_site =
        perc::pc_site_estimate(sizes, opts.pc_samples, opts.seed).value;
    rep.pc_site_provenance = "estimated";
  }
  rep.target_p = 0.5 * (0.5 + rep.pc_site);
  rep.seed_level_p = stats::normal_tail(2.0 * h0 * std::sqrt(2.0));

  rep.gates.push_back(
      {"seed-level-density", rep.seed_level_p, rep.target_p,
       rep.seed_level_p >= rep.target_p, "analytic",
       "upper tail of N(0,1/2) at 2 h0 must reach (1/2)(1/2 + pc_site)"});

  // Smallest dimension where the perturbation tail gate closes. The gate
  // value decreases in d, so bracket by doubling from below (this keeps the
  // probed dimensions near d0 instead of always touching the cap), then
  // bisect. Non-finite gate values count as failures.
  const int d_cap = 1000000;
  const double thr = 1.0 / 40.0;
  const auto ok = [&](int d) { return tail_gate_value(h0, L0, d) <= thr; };
  if (ok(6)) {
    rep.d0 = 6;
  } else {
    int lo = 6, hi = 6;
    while (hi < d_cap && !ok(hi)) {
      lo = hi;
      hi = hi <= d_cap / 2 ? 2 * hi : d_cap;
    }
    if (!ok(hi)) {
      rep.d0 = -1;
    } else {
      while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
      }
      rep.d0 = hi;
    }
  }
  {
    const int at = rep.d0 > 0 ? rep.d0 : d_cap;
    rep.gates.push_back(
        {"perturbation-tail", tail_gate_value(h0, L0, at), thr, rep.d0 > 0,
         "analytic",
         "(2 L0)^3 vtilde(h0^2 / (2 rho_bound(d)))^{1/4} at d = " +
             std::to_string(at)});
  }
  rep.message = rep.d0 > 0 ? "ok" : "h0 too small for this L0";

  if (opts.run_mc && rep.d0 >= 6 && opts.mc_samples > 0) {
    const int d0 = rep.d0;
    const lattice::Point anchor = lattice::origin(3);
    const std::vector<lattice::Point> sites =
        lattice::box_points(lattice::Box::attached(anchor, 2 * L0));
    const std::size_t m = sites.size();
    const std::size_t n = opts.mc_samples;
    const greens::HighDimScalars& sc = scalars_for(d0);

    // Dominant-field gates on iid N(0,1/2) draws: the one-site density
    // and the block crossing event at level 2 h0.
    std::size_t site_hits = 0;
    std::size_t block_hits = 0;
    std::vector<double> psi(m);
    const double root_half = std::sqrt(0.5);
    for (std::size_t s = 0; s < n; ++s) {
      kernels::normal_fill(opts.seed, s, 0, psi.data(), m);
      for (double& v : psi) v *= root_half;
      if (psi[0] >= 2.0 * h0) ++site_hits;
      gff::DecompositionSample sm{sites, psi, std::vector<double>(m, 0.0),
                                  sc, 0.0};
      if (perc::block_events(sm, L0, h0, anchor).f) ++block_hits;
    }
    const double site_freq = static_cast<double>(site_hits) / n;
    const double block_freq = static_cast<double>(block_hits) / n;
    rep.gates.push_back(
        {"seed-level-density-mc", site_freq, rep.target_p,
         site_freq >= rep.target_p, "empirical",
         "one-site frequency over " + std::to_string(n) + " iid draws"});
    rep.gates.push_back(
        {"dominant-block-density", block_freq, 1.0 - thr,
         block_freq >= 1.0 - thr, "empirical",
         "frequency of the block crossing event at level 2 h0 over " +
             std::to_string(n) + " iid draws; stands in for the "
             "renormalized density, whose exact map is external"});

    if (d0 <= opts.mc_dim_cap) {
      const gff::DecompositionSampler ds(d0, sites);
      std::size_t slip_hits = 0;
      for (std::size_t s = 0; s < n; ++s) {
        const gff::DecompositionSample sm = ds.draw(opts.seed + 1, s);
        bool slip = false;
        for (double v : sm.xi)
          if (v < -h0) {
            slip = true;
            break;
          }
        if (slip) ++slip_hits;
      }
      const double slip_freq = static_cast<double>(slip_hits) / n;
      rep.gates.push_back(
          {"perturbation-block-mc", slip_freq, thr, slip_freq <= thr,
           "empirical",
           "frequency of a perturbation dip below -h0 on the block at "
           "d = " + std::to_string(d0)});
    } else {
      rep.gates.push_back(
          {"perturbation-block-mc", 0.0, thr, false, "empirical",
           "skipped: d0 exceeds mc_dim_cap"});
    }
  }
  return rep;
}

}  // namespace fieldperc::renorm
