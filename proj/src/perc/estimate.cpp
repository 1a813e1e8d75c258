// Monte Carlo estimators for crossing probabilities, connectivity, and the
// half-crossing level, plus the iid site-percolation calibration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fieldperc/gff.hpp"
#include "fieldperc/greens.hpp"
#include "fieldperc/kernels.hpp"
#include "fieldperc/perc.hpp"
#include "fieldperc/stats.hpp"
#include "internal.hpp"

namespace fieldperc::perc {

namespace {

// copy of the field on a sub-box of its window; lexicographic iteration over
// the window visits the sub-box sites in their own lexicographic order
gff::ScalarField restrict_field(const gff::ScalarField& f,
                                const lattice::Box& b) {
  const lattice::Box& src = f.window.box();
  if (src.lo == b.lo && src.hi == b.hi) return f;
  const lattice::Window wb(b);
  gff::ScalarField out{wb, std::vector<double>(wb.size(), 0.0),
                       f.seed, f.stream, f.sampler, f.boundary};
  const int d = f.window.dim();
  std::size_t k = 0;
  f.window.for_each([&](std::size_t idx, const lattice::Coord* c) {
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      if (c[a] < b.lo[ua] || c[a] > b.hi[ua]) return;
    }
    out.values[k++] = f.values[idx];
  });
  return out;
}

void check_mc_args(int d, lattice::Coord L, std::size_t n,
                   lattice::Coord margin) {
  if (d < 2) throw std::invalid_argument("estimator: dimension must be >= 2");
  if (L < 1) throw std::invalid_argument("estimator: size must be positive");
  if (n == 0) throw std::invalid_argument("estimator: need at least one sample");
  if (margin < 0) throw std::invalid_argument("estimator: negative margin");
}

// largest level at which the sample still crosses, by bisection; sets
// clipped when the bracket misses
double crossing_threshold(const gff::ScalarField& f, const lattice::Box& inner,
                          const lattice::Box& outer, double lo, double hi,
                          int iters, bool& clipped) {
  const auto cross = [&](double h) {
    return crossing(excursion_set(f, h), inner, outer);
  };
  clipped = true;
  if (!cross(lo)) return lo;
  if (cross(hi)) return hi;
  clipped = false;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cross(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// median and an order-statistic half-band around it, on sorted data
void median_band(const std::vector<double>& sorted, double& med, double& se) {
  const std::size_t n = sorted.size();
  med = 0.5 * (sorted[(n - 1) / 2] + sorted[n / 2]);
  const auto w = static_cast<std::size_t>(
      std::max<long>(1, std::lround(0.5 * std::sqrt(static_cast<double>(n)))));
  const std::size_t mid = n / 2;
  const std::size_t lo = mid > w ? mid - w : 0;
  const std::size_t hi = std::min(n - 1, mid + w);
  se = 0.5 * (sorted[hi] - sorted[lo]);
}

HstarReport hstar_impl(int d, const std::vector<lattice::Coord>& sizes,
                       double h_min, double h_max, std::size_t n,
                       std::uint64_t seed, bool iid) {
  if (d < 3) throw std::invalid_argument("estimate_hstar: dimension must be >= 3");
  if (sizes.size() < 3)
    throw std::invalid_argument("estimate_hstar: need at least three sizes");
  if (!(h_min < h_max))
    throw std::invalid_argument("estimate_hstar: empty level bracket");
  if (n < 8) throw std::invalid_argument("estimate_hstar: need at least 8 samples");

  HstarReport rep;
  rep.sizes = sizes;
  rep.n_samples = n;
  rep.seed = seed;

  const lattice::Point o = lattice::origin(d);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const lattice::Coord L = sizes[i];
    if (L < 2) throw std::invalid_argument("estimate_hstar: sizes must be >= 2");
    const lattice::Coord margin = L - 1;
    const lattice::Box inner = lattice::Box::centered(o, L);
    const lattice::Box outer = lattice::Box::centered(o, 2 * L);

    std::vector<double> t;
    t.reserve(n);
    std::size_t clipped = 0;
    if (iid) {
      const lattice::Window wo(outer);
      std::vector<double> vals(wo.size());
      for (std::size_t s = 0; s < n; ++s) {
        kernels::normal_fill(seed, i * n + s, 0, vals.data(), vals.size());
        const gff::ScalarField f{wo, vals, seed, i * n + s, "iid", "zero"};
        bool clip = false;
        t.push_back(crossing_threshold(f, inner, outer, h_min, h_max, 12, clip));
        clipped += clip ? 1 : 0;
      }
    } else {
      const lattice::Window w(lattice::Box::centered(o, 2 * L + margin));
      gff::BoxSampler bs(w);
      for (std::size_t s = 0; s < n; ++s) {
        const gff::ScalarField f =
            restrict_field(bs.draw(seed, i * n + s), outer);
        bool clip = false;
        t.push_back(crossing_threshold(f, inner, outer, h_min, h_max, 12, clip));
        clipped += clip ? 1 : 0;
      }
    }
    if (clipped * 20 > n)
      throw std::invalid_argument("estimate_hstar: level bracket too coarse");
    std::sort(t.begin(), t.end());
    double med = 0.0, se = 0.0;
    median_band(t, med, se);
    rep.locus.push_back(med);
    rep.locus_se.push_back(se);
  }

  rep.h_lo = *std::min_element(rep.locus.begin(), rep.locus.end());
  rep.h_hi = *std::max_element(rep.locus.begin(), rep.locus.end());
  const std::size_t imax = static_cast<std::size_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  rep.hstar_point = rep.locus[imax];
  const double sd =
      iid ? 1.0 : std::sqrt(greens::green_quadrature(d, o).value);
  rep.tail_prob = stats::normal_tail(rep.hstar_point / sd);
  return rep;
}

}  // namespace

std::vector<McEstimate> estimate_crossing_curve(int d, lattice::Coord L,
                                                const std::vector<double>& hs,
                                                std::size_t n,
                                                std::uint64_t seed,
                                                lattice::Coord margin) {
  check_mc_args(d, L, n, margin);
  if (hs.empty())
    throw std::invalid_argument("estimate_crossing_curve: no levels");

  const lattice::Point o = lattice::origin(d);
  const lattice::Box inner = lattice::Box::centered(o, L);
  const lattice::Box outer = lattice::Box::centered(o, 2 * L);
  const lattice::Window w(lattice::Box::centered(o, 2 * L + margin));
  gff::BoxSampler bs(w);

  std::vector<std::size_t> hits(hs.size(), 0);
  for (std::size_t s = 0; s < n; ++s) {
    const gff::ScalarField f = restrict_field(bs.draw(seed, s), outer);
    for (std::size_t j = 0; j < hs.size(); ++j)
      if (crossing(excursion_set(f, hs[j]), inner, outer)) ++hits[j];
  }

  std::vector<McEstimate> out;
  out.reserve(hs.size());
  for (std::size_t j = 0; j < hs.size(); ++j)
    out.push_back(
        detail::bernoulli_estimate(hits[j], n, seed, d, L, hs[j], margin));
  return out;
}

McEstimate estimate_crossing(int d, lattice::Coord L, double h, std::size_t n,
                             std::uint64_t seed, lattice::Coord margin) {
  return estimate_crossing_curve(d, L, {h}, n, seed, margin).front();
}

McEstimate estimate_escape(int d, lattice::Coord radius, double h,
                           std::size_t n, std::uint64_t seed,
                           lattice::Coord margin) {
  check_mc_args(d, radius, n, margin);

  const lattice::Point o = lattice::origin(d);
  const lattice::Box inner = lattice::Box::centered(o, 0);
  const lattice::Box outer = lattice::Box::centered(o, radius);
  const lattice::Window w(lattice::Box::centered(o, radius + margin));
  gff::BoxSampler bs(w);

  std::size_t hits = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const gff::ScalarField f = restrict_field(bs.draw(seed, s), outer);
    if (crossing(excursion_set(f, h), inner, outer)) ++hits;
  }
  return detail::bernoulli_estimate(hits, n, seed, d, radius, h, margin);
}

McEstimate estimate_connectivity(int d, const lattice::Point& x, double h,
                                 std::size_t n, std::uint64_t seed,
                                 lattice::Coord margin) {
  if (d < 2) throw std::invalid_argument("estimate_connectivity: d >= 2");
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("estimate_connectivity: point dimension");
  if (n == 0) throw std::invalid_argument("estimate_connectivity: n >= 1");
  if (margin < 1)
    throw std::invalid_argument("estimate_connectivity: margin must be >= 1");

  const lattice::Point o = lattice::origin(d);
  const lattice::Coord radius = lattice::linf(x) + margin;
  const lattice::Window w(lattice::Box::centered(o, radius));
  gff::BoxSampler bs(w);

  const std::size_t m = w.size();
  const std::size_t start = w.index(o);
  const std::size_t target = w.index(x);
  const auto strides = detail::window_strides(w);
  std::vector<lattice::Coord> side(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a)
    side[static_cast<std::size_t>(a)] = w.box().side(a);

  std::vector<std::uint8_t> open(m);
  std::vector<std::size_t> stack;
  stack.reserve(m / 4 + 1);

  std::size_t hits = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const gff::ScalarField f = bs.draw(seed, s);
    for (std::size_t i = 0; i < m; ++i) open[i] = f.values[i] >= h ? 1 : 0;
    if (!open[start] || !open[target]) continue;
    if (start == target) {
      ++hits;
      continue;
    }
    // depth-first flood from the origin, consuming open bits, early exit at x
    stack.clear();
    stack.push_back(start);
    open[start] = 0;
    bool reached = false;
    while (!stack.empty() && !reached) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      std::size_t rem = idx;
      for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const auto st = static_cast<std::size_t>(strides[ua]);
        const auto ca = static_cast<lattice::Coord>(rem / st);
        rem %= st;
        if (ca > 0 && open[idx - st]) {
          if (idx - st == target) {
            reached = true;
            break;
          }
          open[idx - st] = 0;
          stack.push_back(idx - st);
        }
        if (ca + 1 < side[ua] && open[idx + st]) {
          if (idx + st == target) {
            reached = true;
            break;
          }
          open[idx + st] = 0;
          stack.push_back(idx + st);
        }
      }
    }
    if (reached) ++hits;
  }
  return detail::bernoulli_estimate(hits, n, seed, d, lattice::linf(x), h,
                                    margin);
}

McEstimate estimate_plane_crossing(lattice::Coord L, double h, std::size_t n,
                                   std::uint64_t seed, lattice::Coord margin) {
  if (L < 1) throw std::invalid_argument("estimate_plane_crossing: L >= 1");
  if (n == 0) throw std::invalid_argument("estimate_plane_crossing: n >= 1");
  if (margin < 1)
    throw std::invalid_argument("estimate_plane_crossing: margin must be >= 1");

  const lattice::Box wbox{{-margin, -margin, -margin},
                          {L + margin, L + margin, margin}};
  const lattice::Window w(wbox);
  gff::BoxSampler bs(w);

  // window indices of the slice sites (x, y, 0), row-major in (x, y)
  const auto sq = static_cast<std::size_t>(L + 1);
  std::vector<std::size_t> slice(sq * sq);
  {
    lattice::Point p(3, 0);
    for (lattice::Coord x = 0; x <= L; ++x)
      for (lattice::Coord y = 0; y <= L; ++y) {
        p[0] = x;
        p[1] = y;
        slice[static_cast<std::size_t>(x) * sq + static_cast<std::size_t>(y)] =
            w.index(p);
      }
  }

  const std::size_t m = sq * sq;
  std::vector<std::uint8_t> open(m);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const gff::ScalarField f = bs.draw(seed, s);
    for (std::size_t i = 0; i < m; ++i)
      open[i] = f.values[slice[i]] >= h ? 1 : 0;

    detail::UnionFind uf(m + 2);
    const auto src = static_cast<std::int32_t>(m);
    const auto snk = static_cast<std::int32_t>(m + 1);
    for (std::size_t i = 0; i < m; ++i) {
      if (!open[i]) continue;
      const std::size_t x = i / sq;
      const std::size_t y = i % sq;
      if (x > 0 && open[i - sq])
        uf.unite(static_cast<std::int32_t>(i), static_cast<std::int32_t>(i - sq));
      if (y > 0 && open[i - 1])
        uf.unite(static_cast<std::int32_t>(i), static_cast<std::int32_t>(i - 1));
      if (x == 0) uf.unite(static_cast<std::int32_t>(i), src);
      if (x == sq - 1) uf.unite(static_cast<std::int32_t>(i), snk);
    }
    if (uf.find(src) == uf.find(snk)) ++hits;
  }
  return detail::bernoulli_estimate(hits, n, seed, 3, L, h, margin);
}

HstarReport estimate_hstar(int d, const std::vector<lattice::Coord>& sizes,
                           double h_min, double h_max, std::size_t n,
                           std::uint64_t seed) {
  return hstar_impl(d, sizes, h_min, h_max, n, seed, false);
}

HstarReport estimate_hstar_iid(int d, const std::vector<lattice::Coord>& sizes,
                               double h_min, double h_max, std::size_t n,
                               std::uint64_t seed) {
  return hstar_impl(d, sizes, h_min, h_max, n, seed, true);
}

McEstimate pc_site_estimate(const std::vector<lattice::Coord>& sizes,
                            std::size_t n, std::uint64_t seed) {
  if (sizes.size() < 3)
    throw std::invalid_argument("pc_site_estimate: need at least three sizes");
  if (n < 8) throw std::invalid_argument("pc_site_estimate: need at least 8 samples");

  const lattice::Point o = lattice::origin(3);
  std::vector<double> loci, bands;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const lattice::Coord L = sizes[i];
    if (L < 2) throw std::invalid_argument("pc_site_estimate: sizes must be >= 2");
    const lattice::Box inner = lattice::Box::centered(o, L);
    const lattice::Box outer = lattice::Box::centered(o, 2 * L);
    const lattice::Window wo(outer);
    const std::size_t m = wo.size();

    std::vector<double> u(m);
    std::vector<double> t;
    t.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
      kernels::uniform_fill(seed, i * n + s, 0, u.data(), m);
      // site open iff u < p: increasing in p, so bisect in the parameter
      const auto cross_at = [&](double p) {
        BinaryConfig cfg{wo, std::vector<std::uint8_t>(m, 0), p};
        for (std::size_t j = 0; j < m; ++j) cfg.open[j] = u[j] < p ? 1 : 0;
        return crossing(cfg, inner, outer);
      };
      double lo = 0.0, hi = 1.0;  // closed at 0, open at 1
      for (int it = 0; it < 14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cross_at(mid))
          hi = mid;
        else
          lo = mid;
      }
      t.push_back(0.5 * (lo + hi));
    }
    std::sort(t.begin(), t.end());
    double med = 0.0, se = 0.0;
    median_band(t, med, se);
    loci.push_back(med);
    bands.push_back(se);
  }

  const std::size_t imax = static_cast<std::size_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  McEstimate e;
  e.value = loci[imax];
  e.se = bands[imax];
  e.n_samples = n;
  e.seed = seed;
  e.d = 3;
  e.L = sizes[imax];
  e.h = 0.0;
  e.margin = 0;
  return e;
}

}  // namespace fieldperc::perc
