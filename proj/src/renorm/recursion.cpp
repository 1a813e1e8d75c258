// The coupled level and probability recursions, run in log space.
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldperc/renorm.hpp"

#include "internal.hpp"

namespace fieldperc::renorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_recursion(const RenormConfig& cfg) {
  if (cfg.d < 3) throw std::invalid_argument("renorm: need d >= 3");
  if (cfg.L0 < 1) throw std::invalid_argument("renorm: need L0 >= 1");
  if (cfg.l0 < 100)
    throw std::invalid_argument("renorm: recursion requires l0 >= 100");
  if (!(cfg.h0 > 0.0)) throw std::invalid_argument("renorm: need h0 > 0");
  if (!cfg.ledger)
    throw std::invalid_argument("renorm: config has no ledger");
}

void validate_depth(int n_max) {
  if (n_max < 0 || n_max > 399)
    throw std::invalid_argument("renorm: depth must lie in [0, 399]");
}

double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// beta_n - M_n: the square-root terms cancel algebraically, so the excess
// is computed directly to avoid subtracting nearly equal quantities.
double beta_excess(double k0, int n) {
  return std::sqrt(std::log(2.0)) +
         std::exp2(0.5 * (n + 1)) * (std::sqrt(static_cast<double>(n)) +
                                     std::sqrt(k0));
}

// Shared iteration q_{n+1} = q_n^2 + 3 exp(-(beta_n - M_n)^2), in logs.
// A zero entry is absorbing: impossible events stay impossible under the
// tree decomposition, so the additive sprinkling cost is never charged.
std::vector<double> iterate_log_bounds(double log_q0, double k0, int n_max) {
  std::vector<double> lq(n_max + 1);
  lq[0] = log_q0;
  for (int n = 0; n < n_max; ++n) {
    if (lq[n] == -kInf) {
      lq[n + 1] = -kInf;
      continue;
    }
    const double ex = beta_excess(k0, n);
    lq[n + 1] = logaddexp(2.0 * lq[n], std::log(3.0) - ex * ex);
  }
  return lq;
}

std::vector<std::string> scale_column(const RenormConfig& cfg, int n_max) {
  std::vector<std::string> out;
  out.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    out.push_back((detail::pow_big(cfg.l0, n) * cfg.L0).str());
  return out;
}

}  // namespace

double k0_constant(const RenormConfig& cfg) {
  validate_recursion(cfg);
  return std::log(2.0) + std::log(cfg.ledger->c0.value) +
         2.0 * (cfg.d - 1) * std::log(static_cast<double>(cfg.l0)) +
         cfg.ledger->B.value;
}

double m_bound(const RenormConfig& cfg, int n) {
  validate_recursion(cfg);
  if (n < 0) throw std::invalid_argument("m_bound: need n >= 0");
  const double log_sites =
      n * std::log(2.0) + cfg.d * std::log(3.0 * static_cast<double>(cfg.L0));
  return cfg.ledger->c2.value * std::sqrt(log_sites);
}

std::vector<double> beta_sequence(const RenormConfig& cfg, int n_max) {
  validate_recursion(cfg);
  validate_depth(n_max);
  const double k0 = k0_constant(cfg);
  std::vector<double> beta(n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    beta[n] = m_bound(cfg, n) + beta_excess(k0, n);
  return beta;
}

LevelSequence h_sequence(const RenormConfig& cfg, int n_max) {
  validate_recursion(cfg);
  validate_depth(n_max);
  const double c1 = cfg.ledger->c1.value;
  const double k0 = k0_constant(cfg);
  const double r = 2.0 * std::pow(static_cast<double>(cfg.l0), -(cfg.d - 2));

  LevelSequence out;
  out.h.assign(n_max + 1, cfg.h0);
  double sum = cfg.h0;
  double ratio_pow = 1.0;
  for (int n = 0; n <= 1200; ++n) {
    ratio_pow *= r;  // r^{n+1}
    const double beta_n = m_bound(cfg, n) + beta_excess(k0, n);
    const double inc = c1 * beta_n * ratio_pow;
    sum += inc;
    if (n + 1 <= n_max) out.h[n + 1] = sum;
    if (inc < 1e-18 * std::max(sum, 1.0) && n >= n_max) break;
  }
  out.h_infinity = sum;
  return out;
}

std::vector<double> k_sequence(const RenormConfig& cfg, int n_max) {
  validate_recursion(cfg);
  validate_depth(n_max);
  const double k0 = k0_constant(cfg);
  const double B = cfg.ledger->B.value;
  std::vector<double> K(n_max + 1);
  K[0] = k0;
  for (int n = 0; n < n_max; ++n) {
    const double ex = beta_excess(k0, n);
    const double half = std::exp2(-(n + 1.0));
    const double t = K[n] + half * (std::log(3.0) - ex * ex);
    K[n + 1] = K[n] - std::log1p(std::exp(t));
  }
  for (int n = 0; n <= n_max; ++n) {
    if (K[n] > k0 + 1e-12)
      throw std::logic_error("k_sequence: value above K0");
    if (K[n] < k0 - B - 1e-9)
      throw std::logic_error("k_sequence: value below K0 - B");
  }
  // The squared bound at level n plus the sprinkling cost must stay under
  // the bound at level n+1; this is what lets the chain double its scale.
  for (int n = 0; n < n_max; ++n) {
    const double scale = std::exp2(n + 1.0);
    const double ex = beta_excess(k0, n);
    const double lhs =
        logaddexp(-K[n] * scale, std::log(3.0) - ex * ex);
    const double rhs = -K[n + 1] * scale;
    if (lhs > rhs + 1e-7 * std::max(1.0, std::abs(rhs)))
      throw std::logic_error("k_sequence: doubling chain violated");
  }
  return K;
}

RecursionTrace certify_from_seed(const RenormConfig& cfg,
                                 const SeedBound& seed, int n_max) {
  validate_recursion(cfg);
  validate_depth(n_max);
  const double k0 = k0_constant(cfg);

  RecursionTrace tr;
  tr.K0 = k0;
  tr.log_p0 = seed.log_p0;
  tr.L_n = scale_column(cfg, n_max);
  tr.M_n.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) tr.M_n[n] = m_bound(cfg, n);
  tr.beta_n = beta_sequence(cfg, n_max);
  const LevelSequence lev = h_sequence(cfg, n_max);
  tr.h_n = lev.h;
  tr.h_infinity = lev.h_infinity;
  tr.K_n = k_sequence(cfg, n_max);

  tr.valid = seed.log_p0 <= -k0 + 1e-12;
  if (seed.provenance == "analytic") {
    tr.provenance = "analytic-conditional";
  } else if (seed.provenance == "mc") {
    tr.provenance = "empirical";
  } else {
    tr.provenance = seed.provenance;
  }

  if (tr.valid) {
    tr.log_p_n = iterate_log_bounds(seed.log_p0, k0, n_max);
    for (int n = 0; n <= n_max; ++n) {
      const double cap = -tr.K_n[n] * std::exp2(static_cast<double>(n));
      if (tr.log_p_n[n] > cap + 1e-7 * std::max(1.0, std::abs(cap)))
        throw std::logic_error("certify_from_seed: bound above the K chain");
    }
  }
  return tr;
}

double p0_upper_bound(const RenormConfig& cfg) {
  validate_recursion(cfg);
  const double g0 = cfg.ledger->g0.value;
  if (!(g0 > 0.0))
    throw std::invalid_argument("p0_upper_bound: ledger g0 must be positive");
  const double log_sites =
      cfg.d * std::log(3.0 * static_cast<double>(cfg.L0));
  const double A = std::sqrt(2.0 * g0 * log_sites);
  const double emax = A + g0 / A;
  if (cfg.h0 <= emax)
    throw std::domain_error(
        "p0_upper_bound: increase h0 (the level must exceed the expected "
        "maximum bound " + std::to_string(emax) + ")");
  const double gap = cfg.h0 - emax;
  return std::exp(-gap * gap / (2.0 * g0));
}

RecursionTrace generic_recursion(const RenormConfig& cfg, double q0,
                                 Direction dir, int n_max) {
  validate_recursion(cfg);
  validate_depth(n_max);
  if (!(q0 >= 0.0 && q0 <= 1.0))
    throw std::invalid_argument("generic_recursion: q0 must lie in [0,1]");
  const double k0 = k0_constant(cfg);

  RecursionTrace tr;
  tr.K0 = k0;
  tr.log_p0 = q0 == 0.0 ? -kInf : std::log(q0);
  tr.L_n = scale_column(cfg, n_max);
  tr.M_n.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) tr.M_n[n] = m_bound(cfg, n);
  tr.beta_n = beta_sequence(cfg, n_max);
  const LevelSequence lev = h_sequence(cfg, n_max);
  if (dir == Direction::increasing) {
    tr.h_n = lev.h;
    tr.h_infinity = lev.h_infinity;
  } else {
    // Flipping the field turns events decreasing in the level into
    // increasing ones at the negated level, so the tower reflects.
    tr.h_n.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n) tr.h_n[n] = 2.0 * cfg.h0 - lev.h[n];
    tr.h_infinity = 2.0 * cfg.h0 - lev.h_infinity;
  }
  tr.K_n = k_sequence(cfg, n_max);
  tr.log_p_n = iterate_log_bounds(tr.log_p0, k0, n_max);
  tr.valid = true;
  tr.provenance = dir == Direction::increasing ? "generic-increasing"
                                               : "generic-decreasing";
  return tr;
}

double rho_exponent(long l0) {
  if (l0 < 2) throw std::invalid_argument("rho_exponent: need l0 >= 2");
  return std::log(2.0) / std::log(static_cast<double>(l0));
}

}  // namespace fieldperc::renorm
