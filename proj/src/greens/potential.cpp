#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "fieldperc/greens.hpp"
#include "fieldperc/kernels.hpp"

namespace fieldperc::greens {

namespace {

// deterministic uniform stream, one philox stream per walk
struct UniformStream {
  std::uint64_t seed;
  std::uint64_t stream;
  std::uint64_t base = 0;
  std::size_t pos = 0;
  static constexpr std::size_t kBuf = 1024;
  double buf[kBuf];

  UniformStream(std::uint64_t s, std::uint64_t st) : seed(s), stream(st) {
    refill();
  }
  void refill() {
    kernels::uniform_fill(seed, stream, base, buf, kBuf);
    base += kBuf;
    pos = 0;
  }
  double next() {
    if (pos == kBuf) refill();
    return buf[pos++];
  }
};

int pick_direction(double u, int two_d) {
  int k = static_cast<int>(u * static_cast<double>(two_d));
  if (k >= two_d) k = two_d - 1;
  return k;
}

}  // namespace

Equilibrium equilibrium_and_capacity(const std::vector<lattice::Point>& K,
                                     int d) {
  if (K.empty())
    throw std::invalid_argument("equilibrium_and_capacity: empty set");
  for (const auto& p : K)
    if (static_cast<int>(p.size()) != d)
      throw std::invalid_argument(
          "equilibrium_and_capacity: point dimension mismatch");

  // the measure is supported on the inner boundary, so for large sets solve
  // the last-exit system restricted there (it stays symmetric PD)
  std::vector<lattice::Point> sites;
  if (K.size() <= 200) {
    sites = K;
  } else {
    lattice::PointSet ks(K.begin(), K.end());
    const auto [inner, outer] = lattice::boundaries(ks);
    sites.assign(inner.begin(), inner.end());
    std::sort(sites.begin(), sites.end());
  }

  lattice::Coord range = 0;
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j)
      range = std::max(range, lattice::linf(lattice::sub(sites[i], sites[j])));
  const GreenTable table(d, range, 1e-9);

  const Eigen::Index m = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd G(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    G(i, i) = table.at0();
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double v = table.at(lattice::sub(sites[static_cast<std::size_t>(i)],
                                             sites[static_cast<std::size_t>(j)]));
      G(i, j) = v;
      G(j, i) = v;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "equilibrium_and_capacity: Green matrix not positive definite");
  const Eigen::VectorXd e = llt.solve(Eigen::VectorXd::Ones(m));

  std::unordered_map<lattice::Point, double, lattice::PointHash> wmap;
  double cap = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    wmap[sites[static_cast<std::size_t>(i)]] = e(i);
    cap += e(i);
  }

  Equilibrium out;
  out.sites = K;
  out.weights.reserve(K.size());
  for (const auto& p : K) {
    const auto it = wmap.find(p);
    out.weights.push_back(it == wmap.end() ? 0.0 : it->second);
  }
  out.capacity = cap;
  return out;
}

double hitting_probability(const std::vector<lattice::Point>& K,
                           const lattice::Point& x, int d) {
  const lattice::PointSet ks(K.begin(), K.end());
  if (ks.count(x)) return 1.0;
  const Equilibrium eq = equilibrium_and_capacity(K, d);
  double p = 0.0;
  for (std::size_t i = 0; i < K.size(); ++i) {
    if (eq.weights[i] == 0.0) continue;
    p += green_quadrature(d, lattice::sub(x, K[i])).value * eq.weights[i];
  }
  return p;
}

double hitting_probability_mc(const std::vector<lattice::Point>& K,
                              const lattice::Point& x, int d, std::size_t n,
                              std::uint64_t seed, double r_escape) {
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("hitting_probability_mc: dimension mismatch");
  const lattice::PointSet ks(K.begin(), K.end());
  if (ks.count(x)) return 1.0;

  // analytic continuation credit at the escape radius; removes the
  // truncation bias up to O(r^{-d}) terms
  const Equilibrium eq = equilibrium_and_capacity(K, d);
  const double ad = green_asymptotic_coeff(d);
  const double expo = 0.5 * (2.0 - static_cast<double>(d));
  const double r2 = r_escape * r_escape;
  const int two_d = 2 * d;

  double hits = 0.0;
  lattice::Point pos(static_cast<std::size_t>(d));
  for (std::size_t walk = 0; walk < n; ++walk) {
    pos = x;
    UniformStream us(seed, walk);
    for (;;) {
      const int k = pick_direction(us.next(), two_d);
      pos[static_cast<std::size_t>(k >> 1)] += (k & 1) ? 1 : -1;
      if (ks.count(pos)) {
        hits += 1.0;
        break;
      }
      double l2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double v = static_cast<double>(pos[static_cast<std::size_t>(a)]);
        l2 += v * v;
      }
      if (l2 >= r2) {
        double credit = 0.0;
        for (std::size_t i = 0; i < K.size(); ++i) {
          if (eq.weights[i] == 0.0) continue;
          const lattice::Point dp = lattice::sub(pos, K[i]);
          double s = 0.0;
          for (lattice::Coord v : dp)
            s += static_cast<double>(v) * static_cast<double>(v);
          credit += ad * std::pow(s, expo) * eq.weights[i];
        }
        hits += credit;
        break;
      }
    }
  }
  return hits / static_cast<double>(n);
}

double kappa(int d) {
  if (d < 6) throw std::invalid_argument("kappa: d >= 6 required");
  const double g0 = green_quadrature(d - 3, lattice::origin(d - 3)).value;
  return (static_cast<double>(d - 3) / static_cast<double>(d)) / g0;
}

double kappa_mc(int d, std::size_t n, std::uint64_t seed, double r_escape) {
  if (d < 6) throw std::invalid_argument("kappa_mc: d >= 6 required");
  const int m = d - 3;
  const int two_m = 2 * m;
  const double r2 = r_escape * r_escape;

  std::size_t escapes = 0;
  lattice::Point pos(static_cast<std::size_t>(m));
  for (std::size_t walk = 0; walk < n; ++walk) {
    std::fill(pos.begin(), pos.end(), lattice::Coord{0});
    pos[0] = 1;
    UniformStream us(seed, walk);
    for (;;) {
      const int k = pick_direction(us.next(), two_m);
      pos[static_cast<std::size_t>(k >> 1)] += (k & 1) ? 1 : -1;
      bool at_zero = true;
      double l2 = 0.0;
      for (int a = 0; a < m; ++a) {
        const double v = static_cast<double>(pos[static_cast<std::size_t>(a)]);
        if (pos[static_cast<std::size_t>(a)] != 0) at_zero = false;
        l2 += v * v;
      }
      if (at_zero) break;
      if (l2 >= r2) {
        ++escapes;
        break;
      }
    }
  }
  const double p_escape = static_cast<double>(escapes) / static_cast<double>(n);
  return (static_cast<double>(d - 3) / static_cast<double>(d)) * p_escape;
}

HighDimScalars highdim_scalars(int d) {
  HighDimScalars s;
  s.d = d;
  s.kappa = kappa(d);
  s.sigma2 = 1.0 / (2.0 - s.kappa);
  s.rho_bound = 2.0 * (1.0 - s.kappa) / (s.kappa * (2.0 - s.kappa));
  return s;
}

GPrimeTable::GPrimeTable(int d, lattice::Coord range, double tol)
    : scalars_(highdim_scalars(d)), range_(range) {
  lattice::Point x(static_cast<std::size_t>(d), 0);
  for (lattice::Coord a = range; a >= 0; --a)
    for (lattice::Coord b = a; b >= 0; --b)
      for (lattice::Coord c = b; c >= 0; --c) {
        x[0] = a;
        x[1] = b;
        x[2] = c;
        double v = green_quadrature(d, x, tol).value;
        if (a == 0 && b == 0 && c == 0) v -= scalars_.sigma2;
        table_.emplace(lattice::Point{a, b, c}, v);
      }
}

double GPrimeTable::at(const lattice::Point& v3) const {
  if (v3.size() != 3)
    throw std::invalid_argument("GPrimeTable::at: expects a 3-point");
  lattice::Point c(v3);
  for (auto& v : c) v = std::llabs(v);
  std::sort(c.begin(), c.end(), std::greater<lattice::Coord>());
  const auto it = table_.find(c);
  if (it == table_.end())
    throw std::out_of_range("GPrimeTable::at: displacement beyond range");
  return it->second;
}

}  // namespace fieldperc::greens
