// Renormalized block events on decomposition samples and the surrounding
// bad-circuit probe on the block grid.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fieldperc/gff.hpp"
#include "fieldperc/kernels.hpp"
#include "fieldperc/perc.hpp"
#include "internal.hpp"

namespace fieldperc::perc {

namespace {

using PointIndex =
    std::unordered_map<lattice::Point, std::size_t, lattice::PointHash>;

PointIndex index_sites(const std::vector<lattice::Point>& sites) {
  PointIndex at;
  at.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) at.emplace(sites[i], i);
  return at;
}

BlockFlags block_events_mapped(const PointIndex& at,
                               const gff::DecompositionSample& sample,
                               lattice::Coord l0, double h,
                               const lattice::Point& anchor) {
  const lattice::Box bb = lattice::Box::attached(anchor, 2 * l0);
  const lattice::Window wb(bb);
  const std::size_t m = wb.size();

  std::vector<double> psi(m), xi(m);
  {
    bool missing = false;
    lattice::Point p(3, 0);
    wb.for_each([&](std::size_t idx, const lattice::Coord* c) {
      p[0] = c[0];
      p[1] = c[1];
      p[2] = c[2];
      const auto it = at.find(p);
      if (it == at.end()) {
        missing = true;
        return;
      }
      psi[idx] = sample.psi[it->second];
      xi[idx] = sample.xi[it->second];
    });
    if (missing)
      throw std::invalid_argument(
          "block_events: sample does not cover the block");
  }

  BlockFlags flags;
  flags.g = true;
  for (std::size_t i = 0; i < m; ++i)
    if (xi[i] < -h) {
      flags.g = false;
      break;
    }

  const gff::ScalarField f{wb, std::move(psi), 0, 0, "block", "zero"};
  const ClusterLabeling lab = label_clusters(excursion_set(f, 2.0 * h), false);
  const std::size_t nc = lab.n_clusters();
  if (nc == 0) {
    flags.f = false;
    return flags;
  }

  constexpr lattice::Coord kBig = std::numeric_limits<lattice::Coord>::max();
  std::vector<lattice::Coord> mn(nc * 3, kBig), mx(nc * 3, -kBig);
  wb.for_each([&](std::size_t idx, const lattice::Coord* c) {
    const std::int32_t lbl = lab.label[idx];
    if (lbl < 0) return;
    const auto base = static_cast<std::size_t>(lbl) * 3;
    for (std::size_t a = 0; a < 3; ++a) {
      mn[base + a] = std::min(mn[base + a], c[a]);
      mx[base + a] = std::max(mx[base + a], c[a]);
    }
  });

  // largest cluster; on ties the smallest label holds the lexicographically
  // smallest site, because labels are ranked by smallest window index
  std::size_t chosen = 0;
  for (std::size_t l = 1; l < nc; ++l)
    if (lab.sizes[l] > lab.sizes[chosen]) chosen = l;

  std::size_t n_wide = 0;
  for (std::size_t l = 0; l < nc; ++l) {
    lattice::Coord diam = 0;
    for (std::size_t a = 0; a < 3; ++a)
      diam = std::max(diam, mx[l * 3 + a] - mn[l * 3 + a]);
    if (diam >= l0 - 1) ++n_wide;
  }

  bool spans = true;
  for (std::size_t a = 0; a < 2; ++a)
    spans = spans && mn[chosen * 3 + a] == bb.lo[a] &&
            mx[chosen * 3 + a] == bb.hi[a];
  flags.f = spans && n_wide == 1;
  return flags;
}

}  // namespace

BlockFlags block_events(const gff::DecompositionSample& sample,
                        lattice::Coord l0, double h,
                        const lattice::Point& anchor) {
  if (l0 < 1) throw std::invalid_argument("block_events: l0 must be >= 1");
  if (anchor.size() != 3)
    throw std::invalid_argument("block_events: anchor must be 3-d");
  return block_events_mapped(index_sites(sample.sites), sample, l0, h, anchor);
}

bool surrounded_by_bad_circuit(const std::vector<std::uint8_t>& bad, int n) {
  if (n < 4)
    throw std::invalid_argument("surrounded_by_bad_circuit: grid too small");
  if (bad.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw std::invalid_argument("surrounded_by_bad_circuit: status size");

  const int c = (n - 2) / 2;
  const auto id = [n](int r, int col) {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(n) +
           static_cast<std::size_t>(col);
  };
  const auto central = [c](int r, int col) {
    return (r == c || r == c + 1) && (col == c || col == c + 1);
  };

  // a surrounding *-circuit of bad cells exists iff no nearest-neighbor path
  // of non-bad cells leads from the central square to the grid frame; the
  // central cells themselves are walkable since the circuit cannot use them
  std::vector<std::uint8_t> seen(bad.size(), 0);
  std::vector<std::pair<int, int>> stack = {
      {c, c}, {c + 1, c}, {c, c + 1}, {c + 1, c + 1}};
  for (const auto& [r, col] : stack) seen[id(r, col)] = 1;
  while (!stack.empty()) {
    const auto [r, col] = stack.back();
    stack.pop_back();
    if (r == 0 || col == 0 || r == n - 1 || col == n - 1) return false;
    const int dr[4] = {1, -1, 0, 0};
    const int dc[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int r2 = r + dr[k];
      const int c2 = col + dc[k];
      if (r2 < 0 || c2 < 0 || r2 >= n || c2 >= n) continue;
      if (seen[id(r2, c2)]) continue;
      if (bad[id(r2, c2)] && !central(r2, c2)) continue;
      seen[id(r2, c2)] = 1;
      stack.emplace_back(r2, c2);
    }
  }
  return true;
}

McEstimate bad_circuit_probe(int d, double h0, lattice::Coord l0, int n_blocks,
                             std::size_t n, std::uint64_t seed) {
  if (d < 6) throw std::invalid_argument("bad_circuit_probe: d must be >= 6");
  if (!(h0 > 0.0))
    throw std::invalid_argument("bad_circuit_probe: level must be positive");
  if (l0 < 1) throw std::invalid_argument("bad_circuit_probe: l0 must be >= 1");
  if (n_blocks < 4 || n_blocks > 8)
    throw std::invalid_argument("bad_circuit_probe: grid must be 4..8 wide");
  if (n == 0) throw std::invalid_argument("bad_circuit_probe: n >= 1");

  const int c = (n_blocks - 2) / 2;
  const auto nb = static_cast<std::size_t>(n_blocks);
  std::vector<lattice::Point> anchors(nb * nb);
  lattice::PointSet uniq;
  std::vector<lattice::Point> sites;
  for (int r = 0; r < n_blocks; ++r)
    for (int col = 0; col < n_blocks; ++col) {
      const lattice::Point anchor{(col - c) * l0, (r - c) * l0, 0};
      anchors[static_cast<std::size_t>(r) * nb +
              static_cast<std::size_t>(col)] = anchor;
      const lattice::Window wb(lattice::Box::attached(anchor, 2 * l0));
      lattice::Point p(3, 0);
      wb.for_each([&](std::size_t, const lattice::Coord* cc) {
        p[0] = cc[0];
        p[1] = cc[1];
        p[2] = cc[2];
        if (uniq.insert(p).second) sites.push_back(p);
      });
    }
  std::sort(sites.begin(), sites.end());
  if (sites.size() > 4000)
    throw std::invalid_argument(
        "bad_circuit_probe: block grid exceeds the dense factorization cap");

  const gff::DecompositionSampler ds(d, sites);
  const PointIndex at = index_sites(sites);

  std::vector<std::uint8_t> bad(nb * nb);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const gff::DecompositionSample smp = ds.draw(seed, s);
    for (std::size_t b = 0; b < nb * nb; ++b)
      bad[b] = block_events_mapped(at, smp, l0, h0, anchors[b]).bad() ? 1 : 0;
    if (surrounded_by_bad_circuit(bad, n_blocks)) ++hits;
  }
  return detail::bernoulli_estimate(hits, n, seed, d, l0, h0, n_blocks);
}

McEstimate bad_circuit_probe_iid(double q, int n_blocks, std::size_t n,
                                 std::uint64_t seed) {
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("bad_circuit_probe_iid: q in [0,1]");
  if (n_blocks < 4 || n_blocks > 64)
    throw std::invalid_argument("bad_circuit_probe_iid: grid must be 4..64 wide");
  if (n == 0) throw std::invalid_argument("bad_circuit_probe_iid: n >= 1");

  const auto nb = static_cast<std::size_t>(n_blocks);
  std::vector<double> u(nb * nb);
  std::vector<std::uint8_t> bad(nb * nb);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < n; ++s) {
    kernels::uniform_fill(seed, s, 0, u.data(), u.size());
    for (std::size_t b = 0; b < u.size(); ++b) bad[b] = u[b] < q ? 1 : 0;
    if (surrounded_by_bad_circuit(bad, n_blocks)) ++hits;
  }
  return detail::bernoulli_estimate(hits, n, seed, 2, n_blocks, q, 0);
}

}  // namespace fieldperc::perc
