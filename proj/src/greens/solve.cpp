#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fieldperc/cg.hpp"
#include "fieldperc/greens.hpp"

namespace fieldperc::greens {

namespace {

lattice::Coord default_radius(int d) {
  switch (d) {
    case 3:
      return 60;
    case 4:
      return 24;
    case 5:
      return 12;
    case 6:
      return 8;
    default:
      throw std::invalid_argument(
          "green_boxsolve: no default radius for this dimension, pass one");
  }
}

}  // namespace

BoxsolveField::BoxsolveField(int d, lattice::Coord radius)
    : d_(d),
      radius_(radius),
      w_(lattice::Box::centered(lattice::origin(d), radius)) {
  if (d < 3) throw std::invalid_argument("BoxsolveField: d >= 3 required");
  if (radius < 2) throw std::invalid_argument("BoxsolveField: radius < 2");

  const double r2 = static_cast<double>(radius) * static_cast<double>(radius);
  std::vector<std::uint8_t> mask(w_.size());
  w_.for_each([&](std::size_t idx, const lattice::Coord* c) {
    double s = 0.0;
    for (int a = 0; a < d; ++a)
      s += static_cast<double>(c[a]) * static_cast<double>(c[a]);
    mask[idx] = (s <= r2) ? 1 : 0;
  });
  const lattice::SiteGraph g = lattice::build_graph(w_, mask.data());

  // rhs: unit source at the origin plus the analytic influx through the
  // boundary, g(y) ~ a_d |y|^{2-d} for the out-of-ball neighbors y
  std::vector<double> b(g.n, 0.0);
  const double ad = green_asymptotic_coeff(d);
  const double inv2d = 1.0 / (2.0 * static_cast<double>(d));
  const double expo = 0.5 * (2.0 - static_cast<double>(d));
  b[static_cast<std::size_t>(g.from_window[w_.index(lattice::origin(d))])] =
      1.0;
  w_.for_each([&](std::size_t idx, const lattice::Coord* c) {
    const std::int32_t ci = g.from_window[idx];
    if (ci < 0) return;
    const std::int32_t* row =
        g.nb.data() +
        static_cast<std::size_t>(ci) * static_cast<std::size_t>(g.deg);
    int slot = 0;
    for (int a = 0; a < d; ++a) {
      for (int s = -1; s <= 1; s += 2, ++slot) {
        if (row[slot] != static_cast<std::int32_t>(g.n)) continue;
        double nl2 = 0.0;
        for (int t = 0; t < d; ++t) {
          const double v = static_cast<double>(c[t]) +
                           ((t == a) ? static_cast<double>(s) : 0.0);
          nl2 += v * v;
        }
        b[static_cast<std::size_t>(ci)] += inv2d * ad * std::pow(nl2, expo);
      }
    }
  });

  u_.assign(g.n, 0.0);
  const solve::CgReport rep =
      solve::cg_solve(g, inv2d, b.data(), u_.data(), 1e-11);
  if (!rep.converged)
    throw std::runtime_error("BoxsolveField: CG failed to converge");

  // boundary replacement error is O(R^-d); the prefactor below is generous
  err_ = 3.0 * ad *
             std::pow(static_cast<double>(radius), -static_cast<double>(d)) +
         rep.rel_residual;
  from_window_ = g.from_window;
}

QuadResult BoxsolveField::at(const lattice::Point& x) const {
  if (static_cast<int>(x.size()) != d_)
    throw std::invalid_argument("BoxsolveField::at: dimension mismatch");
  if (!w_.contains(x))
    throw std::invalid_argument("BoxsolveField::at: point outside the ball");
  const std::int32_t ci = from_window_[w_.index(x)];
  if (ci < 0)
    throw std::invalid_argument("BoxsolveField::at: point outside the ball");
  return {u_[static_cast<std::size_t>(ci)], err_};
}

QuadResult green_boxsolve(int d, const lattice::Point& x) {
  return green_boxsolve(d, x, default_radius(d));
}

QuadResult green_boxsolve(int d, const lattice::Point& x,
                          lattice::Coord radius) {
  return BoxsolveField(d, radius).at(x);
}

KilledGreen::KilledGreen(const lattice::Window& w, const std::uint8_t* mask)
    : w_(w), d_(w.dim()), graph_(lattice::build_graph(w, mask)) {}

std::vector<double> KilledGreen::column(std::size_t y_compact,
                                        double rel_tol) const {
  if (y_compact >= graph_.n)
    throw std::out_of_range("KilledGreen::column: bad compact index");
  std::vector<double> b(graph_.n, 0.0);
  b[y_compact] = 1.0;
  std::vector<double> u(graph_.n, 0.0);
  const double c = 1.0 / (2.0 * static_cast<double>(d_));
  const solve::CgReport rep = solve::cg_solve(graph_, c, b.data(), u.data(), rel_tol);
  if (!rep.converged)
    throw std::runtime_error("KilledGreen::column: CG failed to converge");
  return u;
}

double KilledGreen::value(const lattice::Point& x,
                          const lattice::Point& y) const {
  if (!w_.contains(x) || !w_.contains(y)) return 0.0;
  const std::int32_t ix = graph_.from_window[w_.index(x)];
  const std::int32_t iy = graph_.from_window[w_.index(y)];
  if (ix < 0 || iy < 0) return 0.0;
  const std::vector<double> col = column(static_cast<std::size_t>(iy));
  return col[static_cast<std::size_t>(ix)];
}

std::vector<double> KilledGreen::dense_matrix() const {
  const std::size_t n = graph_.n;
  if (n > 4000)
    throw std::invalid_argument("KilledGreen::dense_matrix: window too large");
  const double c = 1.0 / (2.0 * static_cast<double>(d_));
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t* row =
        graph_.nb.data() + i * static_cast<std::size_t>(graph_.deg);
    for (int s = 0; s < graph_.deg; ++s) {
      if (row[s] == static_cast<std::int32_t>(n)) continue;
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(row[s])) -= c;
    }
  }
  const Eigen::MatrixXd inv =
      A.llt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n)));
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] = inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

double killed_green(const lattice::Window& w, const std::uint8_t* mask,
                    const lattice::Point& x, const lattice::Point& y) {
  return KilledGreen(w, mask).value(x, y);
}

}  // namespace fieldperc::greens
