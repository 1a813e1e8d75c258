// Excursion sets of a sampled field and their cluster geometry.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fieldperc/perc.hpp"
#include "internal.hpp"

namespace fieldperc::perc {

namespace {

// lexicographically negative offsets in {-1,0,1}^d; unioning every open site
// with its open neighbours in these directions visits each edge exactly once
std::vector<std::vector<lattice::Coord>> half_stencil(int d, bool star) {
  std::vector<std::vector<lattice::Coord>> out;
  if (!star) {
    for (int a = 0; a < d; ++a) {
      std::vector<lattice::Coord> o(static_cast<std::size_t>(d), 0);
      o[static_cast<std::size_t>(a)] = -1;
      out.push_back(o);
    }
    return out;
  }
  std::vector<lattice::Coord> o(static_cast<std::size_t>(d), -1);
  while (true) {
    const auto first = std::find_if(o.begin(), o.end(),
                                    [](lattice::Coord v) { return v != 0; });
    if (first != o.end() && *first == -1) out.push_back(o);
    int a = d - 1;
    while (a >= 0 && o[static_cast<std::size_t>(a)] == 1) {
      o[static_cast<std::size_t>(a)] = -1;
      --a;
    }
    if (a < 0) break;
    ++o[static_cast<std::size_t>(a)];
  }
  return out;
}

}  // namespace

bool BinaryConfig::at(const lattice::Point& p) const {
  if (!window.contains(p)) return false;
  return open[window.index(p)] != 0;
}

BinaryConfig excursion_set(const gff::ScalarField& field, double h) {
  BinaryConfig cfg{field.window,
                   std::vector<std::uint8_t>(field.window.size(), 0), h};
  for (std::size_t i = 0; i < cfg.open.size(); ++i)
    cfg.open[i] = field.values[i] >= h ? 1 : 0;
  return cfg;
}

ClusterLabeling label_clusters(const BinaryConfig& config, bool star) {
  const lattice::Window& w = config.window;
  const int d = w.dim();
  const lattice::Box& box = w.box();
  const std::size_t m = w.size();
  const auto strides = detail::window_strides(w);
  const auto stencil = half_stencil(d, star);

  detail::UnionFind uf(m);
  w.for_each([&](std::size_t idx, const lattice::Coord* c) {
    if (!config.open[idx]) return;
    for (const auto& o : stencil) {
      auto nidx = static_cast<std::int64_t>(idx);
      bool inside = true;
      for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (o[ua] == 0) continue;
        const lattice::Coord ca = c[a] + o[ua];
        if (ca < box.lo[ua] || ca > box.hi[ua]) {
          inside = false;
          break;
        }
        nidx += o[ua] * strides[ua];
      }
      if (!inside) continue;
      const auto nu = static_cast<std::size_t>(nidx);
      if (config.open[nu])
        uf.unite(static_cast<std::int32_t>(idx), static_cast<std::int32_t>(nu));
    }
  });

  // second pass in ascending index order: a cluster's id is the rank of its
  // smallest site, which makes the labeling deterministic
  ClusterLabeling lab{w, std::vector<std::int32_t>(m, -1), {}, {}};
  std::vector<std::int32_t> label_of_root(m, -1);
  w.for_each([&](std::size_t idx, const lattice::Coord* c) {
    if (!config.open[idx]) return;
    const std::int32_t root = uf.find(static_cast<std::int32_t>(idx));
    std::int32_t& lbl = label_of_root[static_cast<std::size_t>(root)];
    if (lbl < 0) {
      lbl = static_cast<std::int32_t>(lab.sizes.size());
      lab.sizes.push_back(0);
      lab.touches_boundary.push_back(0);
    }
    lab.label[idx] = lbl;
    ++lab.sizes[static_cast<std::size_t>(lbl)];
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      if (c[a] == box.lo[ua] || c[a] == box.hi[ua]) {
        lab.touches_boundary[static_cast<std::size_t>(lbl)] = 1;
        break;
      }
    }
  });
  return lab;
}

bool crossing(const BinaryConfig& config, const lattice::Box& inner,
              const lattice::Box& outer) {
  const int d = config.window.dim();
  if (inner.dim() != d || outer.dim() != d)
    throw std::invalid_argument("crossing: dimension mismatch");
  const lattice::Box& wbox = config.window.box();
  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (!(outer.lo[ua] < inner.lo[ua] && inner.hi[ua] < outer.hi[ua]))
      throw std::invalid_argument(
          "crossing: inner box must be strictly inside the outer box");
    if (wbox.lo[ua] > outer.lo[ua] || wbox.hi[ua] < outer.hi[ua])
      throw std::invalid_argument(
          "crossing: window does not cover the outer box");
  }

  // a nearest-neighbour path from the inner box must pass through the outer
  // surface before leaving, so the event is decided on the outer box alone
  const lattice::Window wo(outer);
  const std::size_t m = wo.size();

  std::vector<std::uint8_t> local;
  const std::uint8_t* open = nullptr;
  if (wbox.lo == outer.lo && wbox.hi == outer.hi) {
    open = config.open.data();
  } else {
    local.resize(m);
    std::size_t k = 0;
    config.window.for_each([&](std::size_t idx, const lattice::Coord* c) {
      for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (c[a] < outer.lo[ua] || c[a] > outer.hi[ua]) return;
      }
      local[k++] = config.open[idx];
    });
    open = local.data();
  }

  const auto strides = detail::window_strides(wo);
  detail::UnionFind uf(m + 2);
  const auto src = static_cast<std::int32_t>(m);
  const auto snk = static_cast<std::int32_t>(m + 1);

  wo.for_each([&](std::size_t idx, const lattice::Coord* c) {
    if (!open[idx]) return;
    bool in_inner = true;
    bool on_surface = false;
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      if (c[a] < inner.lo[ua] || c[a] > inner.hi[ua]) in_inner = false;
      if (c[a] == outer.lo[ua] || c[a] == outer.hi[ua]) on_surface = true;
      if (c[a] > outer.lo[ua]) {
        const std::size_t nu = idx - static_cast<std::size_t>(strides[ua]);
        if (open[nu])
          uf.unite(static_cast<std::int32_t>(idx),
                   static_cast<std::int32_t>(nu));
      }
    }
    if (in_inner) uf.unite(static_cast<std::int32_t>(idx), src);
    if (on_surface) uf.unite(static_cast<std::int32_t>(idx), snk);
  });

  return uf.find(src) == uf.find(snk);
}

}  // namespace fieldperc::perc
