#include "fieldperc/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace fieldperc::lattice {

Point origin(int d) { return Point(static_cast<std::size_t>(d), 0); }

Point unit(int d, int axis) {
  Point p(static_cast<std::size_t>(d), 0);
  p[static_cast<std::size_t>(axis)] = 1;
  return p;
}

Point add(const Point& a, const Point& b) {
  Point r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Point sub(const Point& a, const Point& b) {
  Point r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Point neg(const Point& a) {
  Point r(a);
  for (auto& v : r) v = -v;
  return r;
}

Coord linf(const Point& x) {
  Coord m = 0;
  for (Coord v : x) m = std::max(m, std::abs(v));
  return m;
}

Coord l1(const Point& x) {
  Coord s = 0;
  for (Coord v : x) s += std::abs(v);
  return s;
}

Coord l2sq(const Point& x) {
  Coord s = 0;
  for (Coord v : x) s += v * v;
  return s;
}

std::size_t PointHash::operator()(const Point& p) const noexcept {
  // FNV-1a over the coordinate bytes
  std::uint64_t h = 1469598103934665603ull;
  for (Coord v : p) {
    auto u = static_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (u >> (8 * i)) & 0xFFu;
      h *= 1099511628211ull;
    }
  }
  return static_cast<std::size_t>(h);
}

bool Box::contains(const Point& p) const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  return true;
}

std::uint64_t Box::volume() const {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < lo.size(); ++i)
    v *= static_cast<std::uint64_t>(hi[i] - lo[i] + 1);
  return v;
}

Box Box::attached(const Point& anchor, Coord side) {
  if (side < 1) throw std::invalid_argument("box side must be positive");
  Box b;
  b.lo = anchor;
  b.hi = anchor;
  for (auto& v : b.hi) v += side - 1;
  return b;
}

Box Box::centered(const Point& center, Coord radius) {
  if (radius < 0) throw std::invalid_argument("radius must be nonnegative");
  Box b;
  b.lo = center;
  b.hi = center;
  for (auto& v : b.lo) v -= radius;
  for (auto& v : b.hi) v += radius;
  return b;
}

std::vector<Point> box_points(const Box& b) {
  std::vector<Point> out;
  out.reserve(b.volume());
  Window w(b);
  w.for_each([&](std::size_t, const Coord* c) {
    out.emplace_back(c, c + b.dim());
  });
  return out;
}

std::vector<Point> ball_points(const Point& center, Coord r) {
  return box_points(Box::centered(center, r));
}

std::vector<Point> sphere_points(const Point& center, Coord r) {
  if (r == 0) return {center};
  std::vector<Point> out;
  const Box b = Box::centered(center, r);
  Window w(b);
  w.for_each([&](std::size_t, const Coord* c) {
    Coord m = 0;
    for (int a = 0; a < b.dim(); ++a)
      m = std::max(m, std::abs(c[a] - center[static_cast<std::size_t>(a)]));
    if (m == r) out.emplace_back(c, c + b.dim());
  });
  return out;
}

std::vector<Point> neighbors(const Point& x, bool star) {
  const int d = static_cast<int>(x.size());
  std::vector<Point> out;
  if (!star) {
    out.reserve(2 * static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      for (Coord s : {Coord{-1}, Coord{1}}) {
        Point p(x);
        p[static_cast<std::size_t>(a)] += s;
        out.push_back(std::move(p));
      }
    }
    return out;
  }
  // odometer over {-1,0,1}^d minus the center
  Point off(static_cast<std::size_t>(d), -1);
  while (true) {
    bool all_zero = true;
    for (Coord v : off)
      if (v != 0) {
        all_zero = false;
        break;
      }
    if (!all_zero) out.push_back(add(x, off));
    int a = d - 1;
    for (; a >= 0; --a) {
      if (++off[static_cast<std::size_t>(a)] <= 1) break;
      off[static_cast<std::size_t>(a)] = -1;
    }
    if (a < 0) break;
  }
  return out;
}

std::pair<PointSet, PointSet> boundaries(const PointSet& K) {
  PointSet inner, outer;
  for (const Point& x : K) {
    for (const Point& y : neighbors(x, false)) {
      if (K.count(y) == 0) {
        inner.insert(x);
        outer.insert(y);
      }
    }
  }
  return {std::move(inner), std::move(outer)};
}

Coord diameter(const PointSet& K) {
  if (K.empty()) throw std::invalid_argument("diameter of empty set");
  const int d = static_cast<int>(K.begin()->size());
  std::vector<Coord> mn(static_cast<std::size_t>(d),
                        std::numeric_limits<Coord>::max());
  std::vector<Coord> mx(static_cast<std::size_t>(d),
                        std::numeric_limits<Coord>::min());
  for (const Point& x : K) {
    for (int a = 0; a < d; ++a) {
      mn[static_cast<std::size_t>(a)] =
          std::min(mn[static_cast<std::size_t>(a)], x[static_cast<std::size_t>(a)]);
      mx[static_cast<std::size_t>(a)] =
          std::max(mx[static_cast<std::size_t>(a)], x[static_cast<std::size_t>(a)]);
    }
  }
  // pairwise sup-norm maximum equals the largest per-axis coordinate range
  Coord diam = 0;
  for (int a = 0; a < d; ++a)
    diam = std::max(diam, mx[static_cast<std::size_t>(a)] -
                              mn[static_cast<std::size_t>(a)]);
  return diam;
}

Point translate(const Point& x, const Point& z) { return add(x, z); }

PointSet translate(const PointSet& K, const Point& z) {
  PointSet out;
  out.reserve(K.size());
  for (const Point& x : K) out.insert(add(x, z));
  return out;
}

Box translate(const Box& b, const Point& z) {
  Box out(b);
  for (std::size_t i = 0; i < out.lo.size(); ++i) {
    out.lo[i] += z[i];
    out.hi[i] += z[i];
  }
  return out;
}

Window::Window(Box box) : box_(std::move(box)) {
  const int d = box_.dim();
  strides_.assign(static_cast<std::size_t>(d), 1);
  for (int a = d - 2; a >= 0; --a)
    strides_[static_cast<std::size_t>(a)] =
        strides_[static_cast<std::size_t>(a + 1)] *
        static_cast<std::size_t>(box_.side(a + 1));
  size_ = strides_.empty() ? 0
                           : strides_[0] * static_cast<std::size_t>(box_.side(0));
}

std::size_t Window::index(const Point& p) const {
  std::size_t idx = 0;
  for (std::size_t a = 0; a < strides_.size(); ++a)
    idx += static_cast<std::size_t>(p[a] - box_.lo[a]) * strides_[a];
  return idx;
}

Point Window::point(std::size_t idx) const {
  Point p(box_.lo);
  for (std::size_t a = 0; a < strides_.size(); ++a) {
    p[a] += static_cast<Coord>(idx / strides_[a]);
    idx %= strides_[a];
  }
  return p;
}

SiteGraph build_graph(const Window& w, const std::uint8_t* mask) {
  const int d = w.dim();
  const std::size_t wn = w.size();
  SiteGraph g;
  g.deg = 2 * d;
  g.from_window.assign(wn, -1);

  std::size_t n = 0;
  for (std::size_t i = 0; i < wn; ++i) {
    if (mask == nullptr || mask[i] != 0) {
      g.from_window[i] = static_cast<std::int32_t>(n);
      ++n;
    }
  }
  g.n = n;
  g.to_window.resize(n);
  for (std::size_t i = 0; i < wn; ++i)
    if (g.from_window[i] >= 0)
      g.to_window[static_cast<std::size_t>(g.from_window[i])] =
          static_cast<std::uint32_t>(i);

  g.nb.assign(n * static_cast<std::size_t>(g.deg),
              static_cast<std::int32_t>(n));  // pad by default

  const Box& b = w.box();
  std::vector<std::size_t> strides(static_cast<std::size_t>(d), 1);
  for (int a = d - 2; a >= 0; --a)
    strides[static_cast<std::size_t>(a)] =
        strides[static_cast<std::size_t>(a + 1)] *
        static_cast<std::size_t>(b.side(a + 1));

  w.for_each([&](std::size_t wi, const Coord* c) {
    const std::int32_t ci = g.from_window[wi];
    if (ci < 0) return;
    std::int32_t* row = g.nb.data() +
                        static_cast<std::size_t>(ci) *
                            static_cast<std::size_t>(g.deg);
    int slot = 0;
    for (int a = 0; a < d; ++a) {
      const std::size_t sa = strides[static_cast<std::size_t>(a)];
      if (c[a] > b.lo[static_cast<std::size_t>(a)]) {
        const std::int32_t q = g.from_window[wi - sa];
        if (q >= 0) row[slot] = q;
      }
      ++slot;
      if (c[a] < b.hi[static_cast<std::size_t>(a)]) {
        const std::int32_t q = g.from_window[wi + sa];
        if (q >= 0) row[slot] = q;
      }
      ++slot;
    }
  });
  return g;
}

}  // namespace fieldperc::lattice
