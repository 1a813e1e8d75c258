// Exact scale towers and descendant-tree counting.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldperc/renorm.hpp"

#include "internal.hpp"

namespace fieldperc::renorm {

namespace detail {

BigInt pow_big(long base, int exp) {
  BigInt r = 1;
  BigInt b = base;
  for (int e = exp; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}

double log_big(const BigInt& x) {
  if (x <= 0) throw std::invalid_argument("log_big: nonpositive argument");
  const std::string s = x.str();
  const std::size_t take = std::min<std::size_t>(s.size(), 15);
  const double lead = std::stod(s.substr(0, take));
  return std::log(lead) +
         static_cast<double>(s.size() - take) * std::log(10.0);
}

BigInt h1_count(int d, long l0) {
  return pow_big(l0, d) - pow_big(l0 - 2, d);
}

namespace {

// Sup-norm distance from the integer z to the segment [0, len-1].
BigInt seg_dist(const BigInt& z, const BigInt& len) {
  if (z < 0) return -z;
  if (z > len - 1) return z - (len - 1);
  return 0;
}

}  // namespace

BigInt h2_count(int d, long L0, long l0, int k) {
  const BigInt L = pow_big(l0, k - 1) * L0;  // child side
  const BigInt Ln = L * l0;                  // parent side
  const BigInt R = Ln / 2;                   // shell distance

  // Per axis, child interval [aL, aL+L-1]: the distance to [0, Ln-1]
  // sweeps a contiguous range [lo(a), hi(a)]. A child box meets the shell
  // iff max_axis lo <= R <= max_axis hi, which counts as N1^d - N2^d with
  // N1 = #{a : lo(a) <= R} and N2 = #{a : hi(a) < R}.
  long n1 = 0;
  long n2 = 0;
  const long a_min = -(l0 / 2 + 3);
  const long a_max = l0 + l0 / 2 + 3;
  for (long a = a_min; a <= a_max; ++a) {
    const BigInt left = L * a;
    const BigInt right = left + (L - 1);
    BigInt lo;
    if (right < 0) {
      lo = -right;
    } else if (left > Ln - 1) {
      lo = left - (Ln - 1);
    } else {
      lo = 0;
    }
    const BigInt hi = std::max(seg_dist(left, Ln), seg_dist(right, Ln));
    if (lo <= R) ++n1;
    if (hi < R) ++n2;
  }
  return pow_big(n1, d) - pow_big(n2, d);
}

bool tree_product_exact(long L0, long l0, int n) {
  if (n <= 1) return true;
  // L[j], R[j] for j = 0..n; R[j] is the shell distance of a level-j box.
  std::vector<BigInt> L(n + 1), R(n + 1);
  L[0] = L0;
  for (int j = 1; j <= n; ++j) {
    L[j] = L[j - 1] * l0;
    R[j] = L[j] / 2;
  }
  // reach[j]: farthest a site of any descendant box can sit from a level-j
  // node's box, accumulated down to level 0.
  std::vector<BigInt> reach(n, 0);
  for (int j = 1; j < n; ++j)
    reach[j] = R[j] + (L[j - 1] - 1) + reach[j - 1];
  // sep[j]: least separation between the boxes of two distinct level-j
  // nodes. Siblings sit at least R[j+1] - (L[j]-1) apart; children of
  // distinct parents inherit the parent separation minus both reaches up
  // to the child boxes.
  std::vector<BigInt> sep(n);
  sep[n - 1] = R[n] - L[n - 1] + 1;
  for (int j = n - 2; j >= 1; --j) {
    const BigInt sibling = R[j + 1] - L[j] + 1;
    const BigInt cross = sep[j + 1] - 2 * (R[j + 1] + L[j] - 1);
    sep[j] = std::min(sibling, cross);
  }
  for (int j = 1; j < n; ++j)
    if (sep[j] <= 2 * reach[j]) return false;
  return true;
}

}  // namespace detail

namespace {

void validate_geometry(const RenormConfig& cfg) {
  if (cfg.d < 3) throw std::invalid_argument("renorm: need d >= 3");
  if (cfg.L0 < 1) throw std::invalid_argument("renorm: need L0 >= 1");
  if (cfg.l0 < 4) throw std::invalid_argument("renorm: need l0 >= 4");
}

}  // namespace

std::string scales(const RenormConfig& cfg, int n) {
  validate_geometry(cfg);
  if (n < 0) throw std::invalid_argument("scales: need n >= 0");
  if (n > 100000) throw std::invalid_argument("scales: depth cap exceeded");
  return (detail::pow_big(cfg.l0, n) * cfg.L0).str();
}

TreeCount tree_counts(const RenormConfig& cfg, int n, int exact_upto) {
  validate_geometry(cfg);
  if (n < 0) throw std::invalid_argument("tree_counts: need n >= 0");
  if (n > 1000) throw std::invalid_argument("tree_counts: depth cap exceeded");
  if (!cfg.ledger)
    throw std::invalid_argument("tree_counts: config has no ledger");

  TreeCount out;
  const double log_per_level =
      std::log(cfg.ledger->c0.value) +
      2.0 * (cfg.d - 1) * std::log(static_cast<double>(cfg.l0));
  out.log_bound = std::exp2(static_cast<double>(n)) * log_per_level;
  out.bound = std::exp(out.log_bound);

  const detail::BigInt h1 = detail::h1_count(cfg.d, cfg.l0);
  std::vector<detail::BigInt> h2(n + 1);
  for (int k = 1; k <= n; ++k) h2[k] = detail::h2_count(cfg.d, cfg.L0, cfg.l0, k);

  const auto to_u64 = [](const detail::BigInt& v) -> std::uint64_t {
    if (v > std::numeric_limits<std::uint64_t>::max()) return 0;
    return v.convert_to<std::uint64_t>();
  };
  out.h1 = to_u64(h1);
  for (int k = 1; k <= n; ++k) out.h2.push_back(to_u64(h2[k]));
  if (out.h1 == 0 ||
      std::any_of(out.h2.begin(), out.h2.end(),
                  [](std::uint64_t v) { return v == 0; }))
    out.exact_note = "counts exceed the 64-bit range; see log_bound";

  if (n <= exact_upto) {
    if (n > 3)
      throw std::invalid_argument("tree_counts: enumeration size cap exceeded");
    if (n == 0) {
      out.exact = "1";
    } else if (detail::tree_product_exact(cfg.L0, cfg.l0, n)) {
      // Each node picks one descendant from each of its two index sets;
      // with clusters of distinct nodes disjoint, the choice tuple and the
      // resulting node set determine each other.
      detail::BigInt total = 1;
      for (int k = 1; k <= n; ++k) {
        const detail::BigInt per_node = h1 * h2[k];
        detail::BigInt reps = per_node;
        for (int e = 0; e < n - k; ++e) reps *= reps;
        total *= reps;  // per_node^(2^(n-k))
      }
      if (detail::log_big(total) > out.log_bound + 1e-6)
        throw std::domain_error(
            "tree_counts: exact count exceeds the ledger bound; c0 too small");
      out.exact = total.str();
    } else {
      out.exact_note =
          "descendant clusters may overlap at this geometry; the product "
          "count is not certified exact";
    }
  }
  return out;
}

}  // namespace fieldperc::renorm
