#pragma once
// Geometry and indexing of Z^d: points, boxes, windows with dense row-major
// indexing, boundaries, neighborhoods, and masked site graphs in the fixed
// degree layout the compute kernels expect.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

namespace fieldperc::lattice {

using Coord = std::int64_t;

// A lattice point is a coordinate vector; all points in one computation share
// the dimension. Bulk data never stores Point objects (windows use dense
// indices); Points appear at API boundaries and in small sets.
using Point = std::vector<Coord>;

Point origin(int d);
Point unit(int d, int axis);

Point add(const Point& a, const Point& b);
Point sub(const Point& a, const Point& b);
Point neg(const Point& a);

Coord linf(const Point& x);
Coord l1(const Point& x);
Coord l2sq(const Point& x);

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept;
};

using PointSet = std::unordered_set<Point, PointHash>;

// Product of inclusive coordinate intervals [lo_j, hi_j]. Attached boxes and
// sup-norm balls are both of this form; spheres are enumerated separately
// since they are not interval products.
struct Box {
  std::vector<Coord> lo;
  std::vector<Coord> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Point& p) const;
  std::uint64_t volume() const;
  Coord side(int axis) const { return hi[axis] - lo[axis] + 1; }

  // B_x(L) = x + {0,...,L-1}^d
  static Box attached(const Point& anchor, Coord side);
  // B(x,r) = {y : |y-x|_inf <= r}
  static Box centered(const Point& center, Coord radius);
};

std::vector<Point> box_points(const Box& b);
std::vector<Point> ball_points(const Point& center, Coord r);
// S(x,r) = {y : |y-x|_inf = r}
std::vector<Point> sphere_points(const Point& center, Coord r);

// 2d nearest neighbors, or the 3^d - 1 *-neighbors when star is set.
std::vector<Point> neighbors(const Point& x, bool star);

// (inner, outer): inner = {x in K : some nearest neighbor is outside K},
// outer = {x outside K : some nearest neighbor is in K}.
std::pair<PointSet, PointSet> boundaries(const PointSet& K);

// sup-norm diameter; throws std::invalid_argument on an empty set.
Coord diameter(const PointSet& K);

Point translate(const Point& x, const Point& z);
PointSet translate(const PointSet& K, const Point& z);
Box translate(const Box& b, const Point& z);

// Dense row-major indexer over a box: a bijection between box points and
// [0, volume). The last axis varies fastest.
class Window {
 public:
  explicit Window(Box box);

  int dim() const { return box_.dim(); }
  std::size_t size() const { return size_; }
  const Box& box() const { return box_; }

  bool contains(const Point& p) const { return box_.contains(p); }
  std::size_t index(const Point& p) const;
  Point point(std::size_t idx) const;

  // Odometer sweep over all sites in index order; f(index, coords) where
  // coords points at a d-length row that is reused between calls.
  template <class F>
  void for_each(F&& f) const {
    const int d = dim();
    std::vector<Coord> c(box_.lo);
    for (std::size_t idx = 0; idx < size_; ++idx) {
      f(idx, c.data());
      for (int a = d - 1; a >= 0; --a) {
        if (++c[a] <= box_.hi[a]) break;
        c[a] = box_.lo[a];
      }
    }
  }

 private:
  Box box_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
};

// Fixed-degree adjacency over a window (or a masked subset of it) in compact
// numbering, laid out for kernels::stencil_apply: nb has n*deg entries and
// missing neighbors point at the pad slot n.
struct SiteGraph {
  std::size_t n = 0;
  int deg = 0;
  std::vector<std::int32_t> nb;
  std::vector<std::uint32_t> to_window;    // compact index -> window index
  std::vector<std::int32_t> from_window;   // window index -> compact or -1
};

// mask may be null (all sites); otherwise mask[w] != 0 marks membership,
// indexed by window index. Nearest-neighbor adjacency only.
SiteGraph build_graph(const Window& w, const std::uint8_t* mask = nullptr);

}  // namespace fieldperc::lattice
