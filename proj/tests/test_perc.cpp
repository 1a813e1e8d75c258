#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fieldperc/gff.hpp"
#include "fieldperc/greens.hpp"
#include "fieldperc/kernels.hpp"
#include "fieldperc/lattice.hpp"
#include "fieldperc/perc.hpp"
#include "fieldperc/stats.hpp"

using namespace fieldperc;
using lattice::Box;
using lattice::Coord;
using lattice::Point;
using lattice::Window;

namespace {

gff::ScalarField make_field(const Window& w, std::vector<double> vals) {
  return gff::ScalarField{w, std::move(vals), 0, 0, "test", "zero"};
}

// reference cluster labeling: lexicographic flood fill through the lattice
// neighbor lists, no union-find involved
perc::ClusterLabeling flood_labels(const perc::BinaryConfig& cfg, bool star) {
  const Window& w = cfg.window;
  perc::ClusterLabeling lab{w, std::vector<std::int32_t>(w.size(), -1), {}, {}};
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!cfg.open[i] || lab.label[i] >= 0) continue;
    const auto id = static_cast<std::int32_t>(lab.sizes.size());
    lab.sizes.push_back(0);
    lab.touches_boundary.push_back(0);
    std::vector<std::size_t> stack{i};
    lab.label[i] = id;
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      ++lab.sizes[static_cast<std::size_t>(id)];
      const Point p = w.point(j);
      for (std::size_t a = 0; a < p.size(); ++a)
        if (p[a] == w.box().lo[a] || p[a] == w.box().hi[a])
          lab.touches_boundary[static_cast<std::size_t>(id)] = 1;
      for (const Point& q : lattice::neighbors(p, star)) {
        if (!w.contains(q)) continue;
        const std::size_t k = w.index(q);
        if (!cfg.open[k] || lab.label[k] >= 0) continue;
        lab.label[k] = id;
        stack.push_back(k);
      }
    }
  }
  return lab;
}

// independent circuit detector: lift *-walks on the bad cells to the cover
// that tracks winding around the center of the protected square; a
// surrounding circuit exists iff some cell closes a walk with net winding
bool circuit_oracle(const std::vector<std::uint8_t>& bad, int n) {
  const int c = (n - 2) / 2;
  const int span = 2 * n + 2;
  const int levels = 2 * span + 1;
  const auto prot = [&](int r, int col) {
    return (r == c || r == c + 1) && (col == c || col == c + 1);
  };
  const auto member = [&](int r, int col) {
    return bad[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) +
               static_cast<std::size_t>(col)] != 0 &&
           !prot(r, col);
  };
  // a step crosses the downward ray from the square center when its columns
  // swap across c + 1/2 below the center row
  const auto delta_w = [&](int r1, int c1, int r2, int c2) {
    if (!((c1 == c && c2 == c + 1) || (c1 == c + 1 && c2 == c))) return 0;
    if (r1 + r2 < 2 * c + 2) return 0;
    return c2 > c1 ? 1 : -1;
  };
  const auto state = [&](int r, int col, int wind) {
    return (static_cast<std::size_t>(r) * static_cast<std::size_t>(n) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(levels) +
           static_cast<std::size_t>(wind + span);
  };
  for (int r0 = 0; r0 < n; ++r0)
    for (int c0 = c; c0 <= c + 1; ++c0) {
      if (!member(r0, c0)) continue;
      std::vector<std::uint8_t> seen(
          static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
              static_cast<std::size_t>(levels),
          0);
      std::vector<std::array<int, 3>> stack;
      stack.push_back({r0, c0, 0});
      seen[state(r0, c0, 0)] = 1;
      while (!stack.empty()) {
        const auto st = stack.back();
        stack.pop_back();
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int r2 = st[0] + dr;
            const int c2 = st[1] + dc;
            if (r2 < 0 || c2 < 0 || r2 >= n || c2 >= n) continue;
            if (!member(r2, c2)) continue;
            const int w2 = st[2] + delta_w(st[0], st[1], r2, c2);
            if (w2 < -span || w2 > span) continue;
            if (r2 == r0 && c2 == c0) {
              if (w2 != 0) return true;
              continue;
            }
            if (seen[state(r2, c2, w2)]) continue;
            seen[state(r2, c2, w2)] = 1;
            stack.push_back({r2, c2, w2});
          }
      }
    }
  return false;
}

Point p3(Coord a, Coord b, Coord c) { return Point{a, b, c}; }

}  // namespace

TEST_CASE("thresholding keeps the sites above the level") {
  const Window w(Box{{0, 0, 0}, {1, 1, 1}});
  std::vector<double> vals(w.size(), 0.0);
  vals[w.index(p3(0, 0, 0))] = 0.5;
  vals[w.index(p3(0, 0, 1))] = -0.5;
  const auto f = make_field(w, vals);

  const auto cfg = perc::excursion_set(f, 0.0);
  CHECK(cfg.level == 0.0);
  CHECK(cfg.at(p3(0, 0, 0)));
  CHECK(cfg.at(p3(1, 1, 1)));  // value 0 >= 0
  CHECK_FALSE(cfg.at(p3(0, 0, 1)));
  CHECK_FALSE(cfg.at(p3(5, 5, 5)));  // outside the window

  const auto all = perc::excursion_set(f, -1e10);
  for (const auto b : all.open) CHECK(b == 1);

  // sitewise domination between levels on the same field
  const auto hi = perc::excursion_set(f, 0.4);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(hi.open[i] <= cfg.open[i]);
}

TEST_CASE("cluster labeling handles explicit small cases") {
  const Window w(Box{{0, 0}, {3, 3}});

  perc::BinaryConfig closed{w, std::vector<std::uint8_t>(w.size(), 0), 0.0};
  CHECK(perc::label_clusters(closed, false).n_clusters() == 0);

  perc::BinaryConfig full{w, std::vector<std::uint8_t>(w.size(), 1), 0.0};
  const auto lab = perc::label_clusters(full, false);
  REQUIRE(lab.n_clusters() == 1);
  CHECK(lab.sizes[0] == 16);
  CHECK(lab.touches_boundary[0] == 1);

  // two cells sharing only a corner: separate under nearest-neighbor
  // adjacency, joined under *-adjacency
  perc::BinaryConfig diag{w, std::vector<std::uint8_t>(w.size(), 0), 0.0};
  diag.open[w.index(Point{1, 1})] = 1;
  diag.open[w.index(Point{2, 2})] = 1;
  CHECK(perc::label_clusters(diag, false).n_clusters() == 2);
  CHECK(perc::label_clusters(diag, true).n_clusters() == 1);

  // label 0 goes to the cluster holding the lexicographically first site
  perc::BinaryConfig two{w, std::vector<std::uint8_t>(w.size(), 0), 0.0};
  two.open[w.index(Point{0, 0})] = 1;
  two.open[w.index(Point{3, 3})] = 1;
  const auto tl = perc::label_clusters(two, false);
  REQUIRE(tl.n_clusters() == 2);
  CHECK(tl.label[w.index(Point{0, 0})] == 0);
  CHECK(tl.label[w.index(Point{3, 3})] == 1);
  CHECK(tl.touches_boundary[0] == 1);
  CHECK(tl.touches_boundary[1] == 1);

  perc::BinaryConfig inner{w, std::vector<std::uint8_t>(w.size(), 0), 0.0};
  inner.open[w.index(Point{1, 2})] = 1;
  const auto il = perc::label_clusters(inner, false);
  REQUIRE(il.n_clusters() == 1);
  CHECK(il.touches_boundary[0] == 0);
}

TEST_CASE("cluster labeling agrees with a flood fill oracle") {
  const Window w(Box{{-1, 2, 0}, {4, 7, 5}});  // 6^3, shifted corner
  std::vector<double> u(w.size());
  for (int t = 0; t < 12; ++t) {
    kernels::uniform_fill(901, static_cast<std::uint64_t>(t), 0, u.data(),
                          u.size());
    const double p = t % 2 == 0 ? 0.4 : 0.7;
    perc::BinaryConfig cfg{w, std::vector<std::uint8_t>(w.size(), 0), p};
    for (std::size_t i = 0; i < u.size(); ++i) cfg.open[i] = u[i] < p ? 1 : 0;

    for (const bool star : {false, true}) {
      const auto got = perc::label_clusters(cfg, star);
      const auto want = flood_labels(cfg, star);
      REQUIRE(got.n_clusters() == want.n_clusters());
      CHECK(got.label == want.label);
      CHECK(got.sizes == want.sizes);
      CHECK(got.touches_boundary == want.touches_boundary);
      std::uint64_t total = 0;
      for (const auto s : got.sizes) total += s;
      std::uint64_t n_open = 0;
      for (const auto b : cfg.open) n_open += b;
      CHECK(total == n_open);
    }
  }
}

TEST_CASE("box to sphere crossing events") {
  const Point o = lattice::origin(3);
  const Box inner = Box::centered(o, 1);
  const Box outer = Box::centered(o, 3);
  const Window w(outer);

  perc::BinaryConfig cfg{w, std::vector<std::uint8_t>(w.size(), 0), 0.0};
  CHECK_FALSE(perc::crossing(cfg, inner, outer));

  std::fill(cfg.open.begin(), cfg.open.end(), 1);
  CHECK(perc::crossing(cfg, inner, outer));

  // a single straight open ray realizes the event
  std::fill(cfg.open.begin(), cfg.open.end(), 0);
  for (Coord x = 0; x <= 3; ++x) cfg.open[w.index(p3(x, 0, 0))] = 1;
  CHECK(perc::crossing(cfg, inner, outer));
  // breaking the ray outside the inner box kills it
  cfg.open[w.index(p3(2, 0, 0))] = 0;
  CHECK_FALSE(perc::crossing(cfg, inner, outer));
}

TEST_CASE("crossing is decided on the outer box restriction") {
  const Point o = lattice::origin(3);
  const Box inner = Box::centered(o, 1);
  const Box outer = Box::centered(o, 3);
  const Window wo(outer);
  const Window wbig(Box::centered(o, 5));

  std::vector<double> u(wbig.size());
  for (int t = 0; t < 20; ++t) {
    kernels::uniform_fill(902, static_cast<std::uint64_t>(t), 0, u.data(),
                          u.size());
    perc::BinaryConfig big{wbig, std::vector<std::uint8_t>(wbig.size(), 0),
                           0.0};
    for (std::size_t i = 0; i < u.size(); ++i) big.open[i] = u[i] < 0.3;

    perc::BinaryConfig small{wo, std::vector<std::uint8_t>(wo.size(), 0), 0.0};
    wo.for_each([&](std::size_t idx, const Coord* c) {
      small.open[idx] = big.at(p3(c[0], c[1], c[2])) ? 1 : 0;
    });
    CHECK(perc::crossing(big, inner, outer) ==
          perc::crossing(small, inner, outer));
  }

  perc::BinaryConfig cfg{wo, std::vector<std::uint8_t>(wo.size(), 1), 0.0};
  CHECK_THROWS_AS(perc::crossing(cfg, Box::centered(o, 3), outer),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::crossing(cfg, inner, Box::centered(o, 5)),
                  std::invalid_argument);
}

TEST_CASE("crossing estimates saturate at extreme levels") {
  const auto low = perc::estimate_crossing(3, 3, -20.0, 40, 11, 2);
  CHECK(low.value == 1.0);
  CHECK(low.se == 0.0);
  CHECK(low.n_samples == 40);
  const auto high = perc::estimate_crossing(3, 3, 20.0, 40, 11, 2);
  CHECK(high.value == 0.0);

  // pure function of its arguments
  const auto again = perc::estimate_crossing(3, 3, -20.0, 40, 11, 2);
  CHECK(again.value == low.value);

  CHECK_THROWS_AS(perc::estimate_crossing(1, 3, 0.0, 10, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::estimate_crossing(3, 0, 0.0, 10, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::estimate_crossing(3, 3, 0.0, 0, 1, 2),
                  std::invalid_argument);
}

TEST_CASE("one set of draws couples the crossing curve monotonely") {
  const std::vector<double> hs{-0.5, 0.2, 0.8, 1.5, 2.5};
  const auto curve = perc::estimate_crossing_curve(3, 4, hs, 200, 12, 3);
  REQUIRE(curve.size() == hs.size());
  for (std::size_t j = 0; j + 1 < curve.size(); ++j)
    CHECK(curve[j].value >= curve[j + 1].value);  // exact, not statistical
  for (const auto& e : curve) {
    CHECK(e.d == 3);
    CHECK(e.L == 4);
    CHECK(e.margin == 3);
  }
  // the single-level estimator reproduces the curve entry
  const auto one = perc::estimate_crossing(3, 4, 0.8, 200, 12, 3);
  CHECK(one.value == curve[2].value);
}

TEST_CASE("escape estimates decrease in the level") {
  const auto a = perc::estimate_escape(3, 5, -20.0, 30, 13, 3);
  CHECK(a.value == 1.0);
  const auto b = perc::estimate_escape(3, 5, 0.8, 200, 13, 3);
  const auto c = perc::estimate_escape(3, 5, 1.6, 200, 13, 3);
  CHECK(b.value >= c.value);  // same seed, same draws, nested events
  CHECK(b.value <= 1.0);
  CHECK(c.value >= 0.0);
}

TEST_CASE("connectivity at the origin matches the one site tail") {
  const Point o = lattice::origin(3);
  const double h = 0.8;
  const std::size_t n = 1500;
  const auto est = perc::estimate_connectivity(3, o, h, n, 14, 6);

  const Window w(Box::centered(o, 6));
  const greens::KilledGreen kg(w);
  const double sd = std::sqrt(kg.value(o, o));
  const double expected = stats::normal_tail(h / sd);
  CHECK(std::abs(est.value - expected) <=
        4.0 * stats::bernoulli_se(expected, n) + 1e-12);

  const auto never = perc::estimate_connectivity(3, o, 30.0, 50, 14, 6);
  CHECK(never.value == 0.0);
}

TEST_CASE("connectivity decays with distance") {
  const std::size_t n = 1200;
  // margins chosen so both runs share the same window geometry
  const auto near = perc::estimate_connectivity(3, p3(2, 0, 0), 1.0, n, 15, 6);
  const auto far = perc::estimate_connectivity(3, p3(6, 0, 0), 1.0, n, 15, 2);
  CHECK(near.value > far.value - 2.0 * (near.se + far.se));
  CHECK(near.value > 0.0);
  CHECK(far.value < 1.0);
}

TEST_CASE("plane crossing probability behaves at the edges") {
  const auto sure = perc::estimate_plane_crossing(6, -20.0, 30, 16, 3);
  CHECK(sure.value == 1.0);
  const auto none = perc::estimate_plane_crossing(6, 20.0, 30, 16, 3);
  CHECK(none.value == 0.0);
  const auto mid = perc::estimate_plane_crossing(6, 0.0, 250, 16, 3);
  CHECK(mid.value >= 0.0);
  CHECK(mid.value <= 1.0);
  CHECK(mid.d == 3);
  CHECK_THROWS_AS(perc::estimate_plane_crossing(6, 0.0, 10, 16, 0),
                  std::invalid_argument);
}

TEST_CASE("decay fits classify synthetic curves") {
  const auto mk = [](Coord L, double p) {
    perc::McEstimate e;
    e.value = p;
    e.n_samples = 1000;
    e.L = L;
    return std::make_pair(L, e);
  };

  std::vector<std::pair<Coord, perc::McEstimate>> stretch;
  for (const Coord L : {4, 8, 16, 32, 64})
    stretch.push_back(mk(L, std::exp(-0.3 * std::pow(double(L), 0.5))));
  const auto fs = perc::fit_decay(stretch);
  CHECK(fs.tag == "stretched-exponential-like");
  CHECK(fs.rho == doctest::Approx(0.5).epsilon(0.21));
  CHECK(fs.cprime == doctest::Approx(0.3).epsilon(0.25));
  CHECK(fs.sse_stretch < fs.sse_poly);

  std::vector<std::pair<Coord, perc::McEstimate>> poly;
  for (const Coord L : {4, 8, 16, 32, 64})
    poly.push_back(mk(L, std::pow(double(L), -2.0)));
  const auto fp = perc::fit_decay(poly);
  CHECK(fp.tag == "polynomial-like");
  CHECK(fp.poly_exponent == doctest::Approx(2.0).epsilon(0.05));

  std::vector<std::pair<Coord, perc::McEstimate>> flat;
  for (const Coord L : {4, 8, 16, 32}) flat.push_back(mk(L, 0.9));
  CHECK(perc::fit_decay(flat).tag == "supercritical-like");

  std::vector<std::pair<Coord, perc::McEstimate>> zero;
  for (const Coord L : {4, 8, 16, 32}) zero.push_back(mk(L, 0.0));
  CHECK(perc::fit_decay(zero).tag == "saturated");

  std::vector<std::pair<Coord, perc::McEstimate>> ones;
  for (const Coord L : {4, 8, 16, 32}) ones.push_back(mk(L, 1.0));
  CHECK(perc::fit_decay(ones).tag == "saturated");

  std::vector<std::pair<Coord, perc::McEstimate>> few = {mk(4, 0.5),
                                                         mk(8, 0.2)};
  CHECK_THROWS_AS(perc::fit_decay(few), std::invalid_argument);

  std::vector<std::pair<Coord, perc::McEstimate>> neg;
  for (const Coord L : {4, 8, 16, 32}) neg.push_back(mk(L, L == 8 ? 0.0 : 0.5));
  CHECK_THROWS_AS(perc::fit_decay(neg), std::invalid_argument);
}

TEST_CASE("iid threshold location matches the site percolation estimate") {
  const std::vector<Coord> sizes{4, 6, 8};
  const std::size_t n = 200;

  const auto rep = perc::estimate_hstar_iid(3, sizes, -1.0, 3.0, n, 17);
  REQUIRE(rep.locus.size() == sizes.size());
  CHECK(rep.h_lo <= rep.h_hi);
  CHECK(rep.hstar_point == rep.locus[2]);
  CHECK(rep.tail_prob ==
        doctest::Approx(stats::normal_tail(rep.hstar_point)).epsilon(1e-12));
  for (const double se : rep.locus_se) CHECK(se > 0.0);

  // thresholding an iid normal field at h opens sites with density equal to
  // the normal tail of h, so the located level must match the direct
  // parameter-space estimate through that map
  const auto pc = perc::pc_site_estimate(sizes, n, 18);
  CHECK(pc.d == 3);
  CHECK(pc.L == 8);
  CHECK(pc.value > 0.05);
  CHECK(pc.value < 0.95);
  CHECK(std::abs(stats::normal_tail(rep.hstar_point) - pc.value) <= 0.02);
}

TEST_CASE("half crossing level of the field sits above zero") {
  const std::vector<Coord> sizes{4, 6, 8};
  const auto rep = perc::estimate_hstar(3, sizes, -1.0, 4.0, 60, 19);
  REQUIRE(rep.locus.size() == 3);
  CHECK(rep.hstar_point > 0.3);
  CHECK(rep.hstar_point < 2.5);
  const double sd = std::sqrt(greens::green_quadrature(3, lattice::origin(3)).value);
  CHECK(rep.tail_prob ==
        doctest::Approx(stats::normal_tail(rep.hstar_point / sd)).epsilon(1e-12));

  // a bracket that misses the thresholds entirely must be refused
  CHECK_THROWS_AS(perc::estimate_hstar(3, sizes, 3.5, 4.0, 8, 19),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::estimate_hstar(3, {4, 6}, -1.0, 4.0, 8, 19),
                  std::invalid_argument);
}

TEST_CASE("block events fire on engineered configurations") {
  const Coord l0 = 2;
  const Point anchor = p3(0, 0, 0);
  const Box bb = Box::attached(anchor, 2 * l0);
  const Window wb(bb);
  const std::size_t m = wb.size();

  std::vector<Point> sites;
  wb.for_each([&](std::size_t, const Coord* c) {
    sites.push_back(p3(c[0], c[1], c[2]));
  });

  const auto sample = [&](const std::vector<double>& psi,
                          const std::vector<double>& xi) {
    return gff::DecompositionSample{sites, psi, xi, {}, 0.0};
  };

  const std::vector<double> calm(m, 0.0);
  const std::vector<double> loud(m, 10.0);

  // everything open, nothing below the floor: a good block
  auto fl = perc::block_events(sample(loud, calm), l0, 1.0, anchor);
  CHECK(fl.f);
  CHECK(fl.g);
  CHECK(fl.good());
  CHECK_FALSE(fl.bad());

  // the perturbation floor is inclusive
  std::vector<double> edge(m, 0.0);
  edge[0] = -1.0;
  CHECK(perc::block_events(sample(loud, edge), l0, 1.0, anchor).g);
  edge[0] = -1.0 - 1e-9;
  CHECK_FALSE(perc::block_events(sample(loud, edge), l0, 1.0, anchor).g);

  // open sites confined to one face: no first-axis crossing
  std::vector<double> plane(m, -10.0);
  wb.for_each([&](std::size_t idx, const Coord* c) {
    if (c[0] == 0) plane[idx] = 10.0;
  });
  const auto fp = perc::block_events(sample(plane, calm), l0, 1.0, anchor);
  CHECK_FALSE(fp.f);
  CHECK(fp.g);
  CHECK(fp.bad());

  // two disjoint slabs both cross the first two axes: uniqueness fails
  std::vector<double> slabs(m, -10.0);
  wb.for_each([&](std::size_t idx, const Coord* c) {
    if (c[2] == 0 || c[2] == 3) slabs[idx] = 10.0;
  });
  const auto f2 = perc::block_events(sample(slabs, calm), l0, 1.0, anchor);
  CHECK_FALSE(f2.f);

  // one slab alone is fine: it crosses and nothing else is wide
  std::vector<double> one(m, -10.0);
  wb.for_each([&](std::size_t idx, const Coord* c) {
    if (c[2] == 0) one[idx] = 10.0;
  });
  CHECK(perc::block_events(sample(one, calm), l0, 1.0, anchor).f);

  // nothing open at all
  std::vector<double> quiet(m, -10.0);
  CHECK_FALSE(perc::block_events(sample(quiet, calm), l0, 1.0, anchor).f);

  // a sample that does not cover the block is rejected
  auto partial = sites;
  partial.pop_back();
  std::vector<double> short_vals(m - 1, 0.0);
  const gff::DecompositionSample bad{partial, short_vals, short_vals, {}, 0.0};
  CHECK_THROWS_AS(perc::block_events(bad, l0, 1.0, anchor),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::block_events(sample(loud, calm), 0, 1.0, anchor),
                  std::invalid_argument);
}

TEST_CASE("bad circuit detection agrees with the winding oracle") {
  // explicit cases first
  for (const int nb : {4, 6}) {
    const auto sz = static_cast<std::size_t>(nb) * static_cast<std::size_t>(nb);
    std::vector<std::uint8_t> good(sz, 0);
    CHECK_FALSE(perc::surrounded_by_bad_circuit(good, nb));
    CHECK_FALSE(circuit_oracle(good, nb));
    std::vector<std::uint8_t> allbad(sz, 1);
    CHECK(perc::surrounded_by_bad_circuit(allbad, nb));
    CHECK(circuit_oracle(allbad, nb));
  }

  // a tight ring around the protected square, then the same ring with a gap
  {
    const int nb = 6;
    std::vector<std::uint8_t> ring(36, 0);
    for (int r = 1; r <= 4; ++r)
      for (int col = 1; col <= 4; ++col)
        if (r == 1 || r == 4 || col == 1 || col == 4)
          ring[static_cast<std::size_t>(r) * 6 + static_cast<std::size_t>(col)] = 1;
    CHECK(perc::surrounded_by_bad_circuit(ring, nb));
    CHECK(circuit_oracle(ring, nb));
    ring[1 * 6 + 2] = 0;
    CHECK_FALSE(perc::surrounded_by_bad_circuit(ring, nb));
    CHECK_FALSE(circuit_oracle(ring, nb));
  }

  // randomized agreement
  std::vector<double> u(36);
  for (int t = 0; t < 300; ++t) {
    kernels::uniform_fill(903, static_cast<std::uint64_t>(t), 0, u.data(), 36);
    std::vector<std::uint8_t> bad(36);
    for (std::size_t i = 0; i < 36; ++i) bad[i] = u[i] < 0.35 ? 1 : 0;
    CHECK(perc::surrounded_by_bad_circuit(bad, 6) == circuit_oracle(bad, 6));
  }
  for (int t = 0; t < 300; ++t) {
    kernels::uniform_fill(904, static_cast<std::uint64_t>(t), 0, u.data(), 25);
    std::vector<std::uint8_t> bad(25);
    for (std::size_t i = 0; i < 25; ++i) bad[i] = u[i] < 0.5 ? 1 : 0;
    CHECK(perc::surrounded_by_bad_circuit(bad, 5) == circuit_oracle(bad, 5));
  }

  CHECK_THROWS_AS(perc::surrounded_by_bad_circuit(std::vector<std::uint8_t>(9, 1), 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::surrounded_by_bad_circuit(std::vector<std::uint8_t>(10, 1), 4),
                  std::invalid_argument);
}

TEST_CASE("iid circuit probe is monotone in the bad density") {
  const auto zero = perc::bad_circuit_probe_iid(0.0, 6, 200, 20);
  CHECK(zero.value == 0.0);
  const auto one = perc::bad_circuit_probe_iid(1.0, 6, 200, 20);
  CHECK(one.value == 1.0);
  CHECK(one.h == 1.0);  // the density is reported in the level slot

  // common uniforms couple the grids across densities
  double prev = 0.0;
  for (const double q : {0.2, 0.4, 0.6, 0.8}) {
    const auto e = perc::bad_circuit_probe_iid(q, 6, 400, 21);
    CHECK(e.value >= prev);
    prev = e.value;
  }

  // a surrounding circuit needs at least twelve bad cells, so tiny densities
  // cannot produce hits at this sample size
  const auto rare = perc::bad_circuit_probe_iid(0.01, 6, 2000, 22);
  CHECK(rare.value == 0.0);

  CHECK_THROWS_AS(perc::bad_circuit_probe_iid(-0.1, 6, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::bad_circuit_probe_iid(0.5, 3, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("decomposition circuit probe runs the full block pipeline") {
  // at a level this high no block can cross, every block is bad, and the
  // central square is always surrounded
  const auto sure = perc::bad_circuit_probe(10, 5.0, 2, 4, 40, 23);
  CHECK(sure.value == 1.0);
  CHECK(sure.d == 10);
  CHECK(sure.margin == 4);

  const auto again = perc::bad_circuit_probe(10, 5.0, 2, 4, 10, 23);
  const auto again2 = perc::bad_circuit_probe(10, 5.0, 2, 4, 10, 23);
  CHECK(again.value == again2.value);

  CHECK_THROWS_AS(perc::bad_circuit_probe(5, 1.0, 2, 4, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::bad_circuit_probe(10, 1.0, 2, 3, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::bad_circuit_probe(10, 1.0, 6, 8, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(perc::bad_circuit_probe(10, -1.0, 2, 4, 10, 1),
                  std::invalid_argument);
}
