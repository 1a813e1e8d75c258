// Log-space least-squares classification of decay curves. The fits compare
// shapes only; no routine here asserts where the critical level sits.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fieldperc/perc.hpp"

namespace fieldperc::perc {

namespace {

// simple-regression slope/intercept and the residual sum of squares
double least_squares(const std::vector<double>& t, const std::vector<double>& y,
                     double& intercept, double& slope) {
  const auto n = static_cast<double>(t.size());
  double tbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    tbar += t[i];
    ybar += y[i];
  }
  tbar /= n;
  ybar /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - tbar) * (t[i] - tbar);
    sty += (t[i] - tbar) * (y[i] - ybar);
  }
  if (stt <= 0.0)
    throw std::invalid_argument("fit_decay: degenerate size grid");
  slope = sty / stt;
  intercept = ybar - slope * tbar;
  double sse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - intercept - slope * t[i];
    sse += r * r;
  }
  return sse;
}

}  // namespace

DecayFit fit_decay(
    const std::vector<std::pair<lattice::Coord, McEstimate>>& curve) {
  if (curve.size() < 3)
    throw std::invalid_argument("fit_decay: need at least three points");

  DecayFit out;
  bool all_zero = true, all_one = true;
  for (const auto& [L, e] : curve) {
    out.grid.emplace_back(L, e.value);
    all_zero = all_zero && e.value == 0.0;
    all_one = all_one && e.value == 1.0;
  }
  if (all_zero || all_one) {
    out.tag = "saturated";
    return out;
  }

  double pmin = out.grid.front().second, pmax = pmin;
  for (const auto& [L, p] : out.grid) {
    if (p <= 0.0)
      throw std::invalid_argument("fit_decay: nonpositive estimate");
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
  }
  if (pmin >= 0.6 * pmax) {
    out.tag = "supercritical-like";
    return out;
  }

  std::vector<double> y;
  y.reserve(out.grid.size());
  for (const auto& [L, p] : out.grid) y.push_back(std::log(p));

  std::vector<double> t(out.grid.size());
  out.sse_stretch = -1.0;
  for (int k = 1; k <= 20; ++k) {
    const double rho = 0.05 * k;
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = std::pow(static_cast<double>(out.grid[i].first), rho);
    double a = 0.0, b = 0.0;
    const double sse = least_squares(t, y, a, b);
    if (out.sse_stretch < 0.0 || sse < out.sse_stretch) {
      out.sse_stretch = sse;
      out.rho = rho;
      out.cprime = -b;
      out.c = std::exp(a);
    }
  }

  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = std::log(static_cast<double>(out.grid[i].first));
  double a = 0.0, b = 0.0;
  out.sse_poly = least_squares(t, y, a, b);
  out.poly_exponent = -b;
  out.poly_c = std::exp(a);

  out.tag = out.sse_stretch < out.sse_poly ? "stretched-exponential-like"
                                           : "polynomial-like";
  return out;
}

}  // namespace fieldperc::perc
