#pragma once
// Shared helpers for the percolation translation units. Not installed.

#include <cstdint>
#include <numeric>
#include <vector>

#include "fieldperc/lattice.hpp"
#include "fieldperc/perc.hpp"
#include "fieldperc/stats.hpp"

namespace fieldperc::perc::detail {

struct UnionFind {
  std::vector<std::int32_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::int32_t find(std::int32_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::int32_t a, std::int32_t b) { parent[find(a)] = find(b); }
};

// index-space strides of a window, last axis fastest
inline std::vector<std::int64_t> window_strides(const lattice::Window& w) {
  const int d = w.dim();
  std::vector<std::int64_t> s(static_cast<std::size_t>(d), 1);
  for (int a = d - 2; a >= 0; --a)
    s[static_cast<std::size_t>(a)] =
        s[static_cast<std::size_t>(a) + 1] * w.box().side(a + 1);
  return s;
}

inline McEstimate bernoulli_estimate(std::size_t hits, std::size_t n,
                                     std::uint64_t seed, int d,
                                     lattice::Coord L, double h,
                                     lattice::Coord margin) {
  McEstimate e;
  e.value = static_cast<double>(hits) / static_cast<double>(n);
  e.se = stats::bernoulli_se(e.value, n);
  e.n_samples = n;
  e.seed = seed;
  e.d = d;
  e.L = L;
  e.h = h;
  e.margin = margin;
  return e;
}

}  // namespace fieldperc::perc::detail
