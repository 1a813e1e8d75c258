#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fieldperc/greens.hpp"

namespace fieldperc::greens {

namespace {

// 15-point Kronrod rule with embedded 7-point Gauss (QUADPACK dqk15).
constexpr double XGK[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double WGK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double WG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// orders grouped as (order, multiplicity), e.g. x = (2,1,1) -> {(2,1),(1,2)}
using Grouped = std::vector<std::pair<int, int>>;

Grouped group_orders(const lattice::Point& x) {
  std::vector<int> ns;
  ns.reserve(x.size());
  for (lattice::Coord v : x) ns.push_back(static_cast<int>(std::llabs(v)));
  std::sort(ns.begin(), ns.end());
  Grouped g;
  for (std::size_t i = 0; i < ns.size();) {
    std::size_t j = i;
    while (j < ns.size() && ns[j] == ns[i]) ++j;
    g.emplace_back(ns[i], static_cast<int>(j - i));
    i = j;
  }
  return g;
}

// memoizes the Bessel ladder at each evaluation abscissa
struct LadderCache {
  int d;
  int n_max;
  std::unordered_map<std::uint64_t, std::vector<double>> map;

  const std::vector<double>& get(double t) {
    const auto key = std::bit_cast<std::uint64_t>(t);
    auto it = map.find(key);
    if (it != map.end()) return it->second;
    std::vector<double> lad(static_cast<std::size_t>(n_max) + 1);
    ive_ladder(t / static_cast<double>(d), n_max, lad.data());
    return map.emplace(key, std::move(lad)).first->second;
  }
};

double product_at(const std::vector<double>& lad, const Grouped& grouped) {
  double p = 1.0;
  for (const auto& [n, c] : grouped) {
    const double v = lad[static_cast<std::size_t>(n)];
    p *= (c == 1) ? v : std::pow(v, c);
  }
  return p;
}

struct PanelOut {
  double kron;
  double err;
};

PanelOut gk15_panel(LadderCache& cache, const Grouped& grouped, double a,
                    double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = product_at(cache.get(mid), grouped);
  double resk = WGK[7] * fc;
  double resg = WG[3] * fc;
  for (int j = 0; j < 3; ++j) {
    const double dx = half * XGK[2 * j + 1];
    const double f1 = product_at(cache.get(mid - dx), grouped);
    const double f2 = product_at(cache.get(mid + dx), grouped);
    resg += WG[j] * (f1 + f2);
    resk += WGK[2 * j + 1] * (f1 + f2);
  }
  for (int j = 0; j < 4; ++j) {
    const double dx = half * XGK[2 * j];
    const double f1 = product_at(cache.get(mid - dx), grouped);
    const double f2 = product_at(cache.get(mid + dx), grouped);
    resk += WGK[2 * j] * (f1 + f2);
  }
  return {resk * half, std::abs((resk - resg) * half)};
}

// integral over [0, T] with per-panel error allocation proportional to width
double integrate_adaptive(LadderCache& cache, const Grouped& grouped, double T,
                          double tol, double* err_out) {
  struct Seg {
    double a, b;
  };
  // seed with geometrically growing panels: a single [0, T] panel puts every
  // quadrature node past the mass of a decaying integrand once T is large,
  // and the embedded error estimate cannot flag what no node has seen
  std::vector<Seg> stack;
  double lo = 0.0;
  double w = std::min(T, 50.0);
  while (lo < T) {
    const double hi = std::min(T, lo + w);
    stack.push_back({lo, hi});
    lo = hi;
    w *= 2.0;
  }
  double total = 0.0, err = 0.0;
  int panels = 0;
  while (!stack.empty()) {
    const Seg s = stack.back();
    stack.pop_back();
    const PanelOut out = gk15_panel(cache, grouped, s.a, s.b);
    const double width = s.b - s.a;
    const double allowance = 0.5 * tol * width / T;
    ++panels;
    if (out.err <= allowance || width <= 1e-12 * T || panels > 20000) {
      total += out.kron;
      err += out.err;
    } else {
      const double mid = 0.5 * (s.a + s.b);
      stack.push_back({s.a, mid});
      stack.push_back({mid, s.b});
    }
  }
  *err_out = err;
  return total;
}

// asymptotic series of ive(n, z) * sqrt(2 pi z): sum_k s[k] z^{-k}, 8 terms
std::array<double, 9> coord_series(int n) {
  std::array<double, 9> s{};
  s[0] = 1.0;
  const double mu = 4.0 * static_cast<double>(n) * static_cast<double>(n);
  double num = 1.0;
  double denom = 1.0;
  for (int k = 1; k <= 8; ++k) {
    const double odd = 2.0 * k - 1.0;
    num *= mu - odd * odd;
    denom *= 8.0 * k;
    s[static_cast<std::size_t>(k)] = ((k % 2) ? -1.0 : 1.0) * num / denom;
  }
  return s;
}

std::array<double, 9> series_mul(const std::array<double, 9>& a,
                                 const std::array<double, 9>& b) {
  std::array<double, 9> c{};
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; i + j <= 8; ++j)
      c[static_cast<std::size_t>(i + j)] +=
          a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
  return c;
}

// analytic integral of the product asymptotics over t in [d*zT, inf)
double tail_integral(int d, const Grouped& grouped, double zT,
                     double* err_out) {
  std::array<double, 9> prod{};
  prod[0] = 1.0;
  for (const auto& [n, c] : grouped) {
    const auto s = coord_series(n);
    for (int rep = 0; rep < c; ++rep) prod = series_mul(prod, s);
  }
  const double half_d = 0.5 * static_cast<double>(d);
  const double pref =
      static_cast<double>(d) * std::pow(2.0 * std::numbers::pi, -half_d);
  double sum = 0.0;
  double last = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const double expo = half_d - 1.0 + static_cast<double>(k);
    last = prod[static_cast<std::size_t>(k)] * std::pow(zT, -expo) / expo;
    sum += last;
  }
  *err_out = std::abs(pref * last);  // magnitude of the final retained term
  return pref * sum;
}

double zt_for(int n_max) {
  return std::max(50.0, 4.0 * static_cast<double>(n_max) *
                            static_cast<double>(n_max));
}

QuadResult quadrature_grouped(int d, const Grouped& grouped, int n_max,
                              double tol, LadderCache& cache) {
  const double zT = zt_for(n_max);
  const double T = static_cast<double>(d) * zT;
  double qerr = 0.0, terr = 0.0;
  const double body = integrate_adaptive(cache, grouped, T, tol, &qerr);
  const double tail = tail_integral(d, grouped, zT, &terr);
  return {body + tail, qerr + terr};
}

lattice::Point canonical(const lattice::Point& x) {
  lattice::Point c(x);
  for (auto& v : c) v = std::llabs(v);
  std::sort(c.begin(), c.end(), std::greater<lattice::Coord>());
  return c;
}

}  // namespace

QuadResult green_quadrature(int d, const lattice::Point& x, double tol) {
  if (d < 3) throw std::invalid_argument("green_quadrature: d >= 3 required");
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("green_quadrature: point dimension mismatch");
  const Grouped grouped = group_orders(x);
  const int n_max = static_cast<int>(lattice::linf(x));
  LadderCache cache{d, n_max, {}};
  return quadrature_grouped(d, grouped, n_max, tol, cache);
}

double green_asymptotic_coeff(int d) {
  const double half_d = 0.5 * static_cast<double>(d);
  return static_cast<double>(d) * std::exp(std::lgamma(half_d - 1.0)) /
         (2.0 * std::pow(std::numbers::pi, half_d));
}

GreenTable::GreenTable(int d, lattice::Coord range, double tol)
    : d_(d), range_(range) {
  if (d < 3) throw std::invalid_argument("GreenTable: d >= 3 required");
  if (range < 0) throw std::invalid_argument("GreenTable: negative range");

  // count nonincreasing tuples C(range + d, d) and refuse absurd builds
  double count = 1.0;
  for (int i = 1; i <= d; ++i)
    count *= static_cast<double>(range + i) / static_cast<double>(i);
  if (count > 2e6)
    throw std::invalid_argument("GreenTable: canonical set too large");

  LadderCache cache{d, static_cast<int>(range), {}};
  lattice::Point cur(static_cast<std::size_t>(d), 0);
  // enumerate nonincreasing coordinate tuples
  const auto rec = [&](auto&& self, int pos, lattice::Coord maxv) -> void {
    if (pos == d) {
      const Grouped grouped = group_orders(cur);
      const int n_max = static_cast<int>(cur[0]);
      const QuadResult q = quadrature_grouped(d, grouped, n_max, tol, cache);
      table_.emplace(cur, q.value);
      max_error_ = std::max(max_error_, q.error);
      return;
    }
    for (lattice::Coord v = maxv; v >= 0; --v) {
      cur[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, v);
    }
  };
  rec(rec, 0, range);
  g0_ = table_.at(lattice::Point(static_cast<std::size_t>(d), 0));
}

double GreenTable::at(const lattice::Point& x) const {
  if (static_cast<int>(x.size()) != d_)
    throw std::invalid_argument("GreenTable::at: dimension mismatch");
  const auto it = table_.find(canonical(x));
  if (it == table_.end())
    throw std::out_of_range("GreenTable::at: displacement beyond range");
  return it->second;
}

}  // namespace fieldperc::greens
