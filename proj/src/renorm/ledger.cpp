// Numeric defaults for the constants ledger. Every number is computed from
// the library's own walk functionals; the provenance notes say how.
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "fieldperc/greens.hpp"
#include "fieldperc/lattice.hpp"
#include "fieldperc/renorm.hpp"

#include "internal.hpp"

namespace fieldperc::renorm {

namespace {

double box_capacity(int d, long side) {
  lattice::Point anchor = lattice::origin(d);
  const lattice::Box b = lattice::Box::attached(anchor, side);
  return greens::equilibrium_and_capacity(lattice::box_points(b), d).capacity;
}

double inner_boundary_count(int d, long side) {
  const double s = static_cast<double>(side);
  const double t = static_cast<double>(std::max<long>(side - 2, 0));
  return std::pow(s, d) - std::pow(t, d);
}

// sup over a fixed family of displacements of g(x) |x|_inf^{d-2}. The
// Green function decays at that rate, so nearby sites dominate; the family
// covers axis, planar-diagonal, cubic-diagonal and all-ones directions.
double green_sup_scan(int d) {
  std::vector<lattice::Point> family;
  for (long r = 1; r <= 8; ++r) {
    lattice::Point p = lattice::origin(d);
    p[0] = r;
    family.push_back(p);
  }
  for (long r = 1; r <= 4; ++r) {
    lattice::Point p = lattice::origin(d);
    p[0] = r;
    p[1] = r;
    family.push_back(p);
  }
  for (long r = 1; r <= 2; ++r) {
    lattice::Point p = lattice::origin(d);
    p[0] = r;
    p[1] = r;
    p[2] = r;
    family.push_back(p);
  }
  family.push_back(lattice::Point(d, 1));
  double best = 0.0;
  for (const auto& x : family) {
    const double g = greens::green_quadrature(d, x).value;
    const double r = static_cast<double>(lattice::linf(x));
    best = std::max(best, g * std::pow(r, d - 2));
  }
  return best;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ConstantsLedger build_defaults(int d, long L0, long l0) {
  ConstantsLedger led;

  const double g0 = greens::green_quadrature(d, lattice::origin(d)).value;
  led.g0 = {g0, "numeric-default", "walk Green function at 0 by quadrature"};

  led.B = {3.0 / (1.0 - std::exp(-1.0)), "paper-symbolic", "3 / (1 - e^{-1})"};

  led.c2 = {1.0 + 1.0 / (2.0 * d * std::log(3.0 * static_cast<double>(L0))),
            "numeric-default",
            "maximum-expectation multiplier 1 + 1/(2 log|K|) at the "
            "smallest test geometry"};

  // Tightest branching ratio: the per-node descendant count h1 * h2(k)
  // stabilizes in k once the shell-to-child ratio repeats, so a bounded
  // sweep captures the maximum.
  {
    const detail::BigInt h1 = detail::h1_count(d, l0);
    double best = 0.0;
    int best_k = 1;
    for (int k = 1; k <= 64; ++k) {
      const detail::BigInt h2 = detail::h2_count(d, L0, l0, k);
      const double lg = detail::log_big(h1 * h2) -
                        2.0 * (d - 1) * std::log(static_cast<double>(l0));
      if (std::exp(lg) > best) {
        best = std::exp(lg);
        best_k = k;
      }
    }
    led.c0 = {best, "numeric-default",
              "max over levels k <= 64 of |H1||H2(k)| / l0^{2(d-1)}, "
              "attained at k = " + std::to_string(best_k)};
  }

  led.green_sup = {green_sup_scan(d), "numeric-default",
                   "sup of g(x) |x|_inf^{d-2} over a fixed family of "
                   "axis and diagonal displacements, |x|_inf <= 8"};

  // Capacity of the side-3L0 box per L0^{d-2}: exact when the inner
  // boundary is small enough for a dense solve, otherwise fitted at
  // smaller boxes with headroom.
  {
    const long target = 3 * L0;
    if (inner_boundary_count(d, target) <= 1600.0) {
      const double cap = box_capacity(d, target);
      led.cap_ratio = {cap / std::pow(static_cast<double>(L0), d - 2),
                       "numeric-default",
                       "exact last-exit capacity of the side-" +
                           std::to_string(target) + " box"};
    } else {
      const long candidates[] = {12, 10, 8, 6, 5, 4, 3, 2};
      std::vector<long> sides;
      for (long s : candidates)
        if (s < target && inner_boundary_count(d, s) <= 1600.0)
          sides.push_back(s);
      if (sides.size() > 2) sides.resize(2);
      if (!sides.empty()) {
        double best = 0.0;
        for (long s : sides) {
          const double est = box_capacity(d, s) * std::pow(3.0, d - 2) /
                             std::pow(static_cast<double>(s), d - 2);
          best = std::max(best, est);
        }
        led.cap_ratio = {1.25 * best, "numeric-default",
                         "capacity ratio fitted on boxes of side " +
                             std::to_string(sides.back()) + ".." +
                             std::to_string(sides.front()) +
                             ", scaled by 3^{d-2} with 25% headroom"};
      } else {
        const double bound = inner_boundary_count(d, target) /
                             std::pow(static_cast<double>(L0), d - 2);
        led.cap_ratio = {bound, "numeric-default",
                         "inner-boundary count bound on the capacity"};
      }
    }
  }

  const double sep = 0.5 - 4.0 / static_cast<double>(l0);
  led.separation = {std::max(sep, 0.0), "numeric-default",
                    "relative sup-norm gap 1/2 - 4/l0 between the tested "
                    "box union and the far box family"};

  if (sep > 0.0) {
    const double c1 = std::sqrt(2.0 * g0) * led.cap_ratio.value *
                      led.green_sup.value * std::pow(sep, -(d - 2));
    led.c1 = {c1, "numeric-default",
              "sqrt(2 g0) * cap_ratio * green_sup * separation^{2-d} = "
              "sqrt(2*" + fmt(g0) + ") * " + fmt(led.cap_ratio.value) +
              " * " + fmt(led.green_sup.value) + " * " + fmt(sep) +
              "^{2-d}"};
  } else {
    led.c1 = {0.0, "numeric-default",
              "separation nonpositive at this l0; sprinkling constant "
              "unavailable"};
  }
  return led;
}

}  // namespace

ConstantsLedger ConstantsLedger::defaults(int d, long L0, long l0) {
  if (d < 3) throw std::invalid_argument("ConstantsLedger: need d >= 3");
  if (L0 < 1) throw std::invalid_argument("ConstantsLedger: need L0 >= 1");
  if (l0 < 4) throw std::invalid_argument("ConstantsLedger: need l0 >= 4");

  static std::mutex mu;
  static std::map<std::tuple<int, long, long>, ConstantsLedger> cache;
  const auto key = std::make_tuple(d, L0, l0);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  ConstantsLedger led = build_defaults(d, L0, l0);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, std::move(led)).first->second;
}

}  // namespace fieldperc::renorm
