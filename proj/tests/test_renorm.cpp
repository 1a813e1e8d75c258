#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fieldperc/gff.hpp"
#include "fieldperc/greens.hpp"
#include "fieldperc/lattice.hpp"
#include "fieldperc/renorm.hpp"
#include "fieldperc/stats.hpp"

using namespace fieldperc;
using renorm::ConstantsLedger;
using renorm::Direction;
using renorm::RenormConfig;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// decimal-string arithmetic on nonnegative integers, used as an oracle for
// the exact counting paths so no shared big-integer code is involved
std::string dec_mul(const std::string& a, std::uint64_t m) {
  if (m == 0) return "0";
  std::string rev;
  unsigned __int128 carry = 0;
  for (std::size_t i = a.size(); i-- > 0;) {
    const unsigned __int128 cur =
        static_cast<unsigned __int128>(a[i] - '0') * m + carry;
    rev.push_back(static_cast<char>('0' + static_cast<int>(cur % 10)));
    carry = cur / 10;
  }
  while (carry > 0) {
    rev.push_back(static_cast<char>('0' + static_cast<int>(carry % 10)));
    carry /= 10;
  }
  std::reverse(rev.begin(), rev.end());
  const std::size_t nz = rev.find_first_not_of('0');
  return nz == std::string::npos ? "0" : rev.substr(nz);
}

std::string dec_pow(std::uint64_t base, int exp) {
  std::string r = "1";
  for (int i = 0; i < exp; ++i) r = dec_mul(r, base);
  return r;
}

double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// sup-norm distance from the integer z to the segment [0, len-1]
long long seg_dist(long long z, long long len) {
  if (z < 0) return -z;
  if (z >= len) return z - len + 1;
  return 0;
}

// counts the level-(k-1) child boxes whose sup-distance range to the box
// [0, L_k - 1]^3 straddles floor(L_k / 2), by enumerating child index
// triples directly; feasible for small l0 only
std::uint64_t h2_oracle_3d(long L0, long l0, int k) {
  long long child = L0;
  for (int i = 1; i < k; ++i) child *= l0;
  const long long parent = child * l0;
  const long long R = parent / 2;

  std::vector<std::pair<long long, long long>> range;
  for (long long a = -(2 * l0 + 8); a <= 3 * l0 + 8; ++a) {
    const long long b0 = a * child;
    const long long b1 = b0 + child - 1;
    long long lo;
    if (b1 < 0 || b0 >= parent)
      lo = std::min(std::max(seg_dist(b0, parent), 0LL),
                    std::max(seg_dist(b1, parent), 0LL));
    else
      lo = 0;
    const long long hi = std::max(seg_dist(b0, parent), seg_dist(b1, parent));
    range.emplace_back(lo, hi);
  }

  std::uint64_t count = 0;
  for (const auto& [l1, u1] : range)
    for (const auto& [l2, u2] : range)
      for (const auto& [l3, u3] : range) {
        const long long lo = std::max({l1, l2, l3});
        const long long hi = std::max({u1, u2, u3});
        if (lo <= R && R <= hi) ++count;
      }
  return count;
}

std::uint64_t h1_oracle_3d(long l0) {
  std::uint64_t count = 0;
  for (long a = 0; a < l0; ++a)
    for (long b = 0; b < l0; ++b)
      for (long c = 0; c < l0; ++c)
        if (a == 0 || a == l0 - 1 || b == 0 || b == l0 - 1 || c == 0 ||
            c == l0 - 1)
          ++count;
  return count;
}

RenormConfig base_config(const ConstantsLedger& led) {
  RenormConfig cfg;
  cfg.d = 3;
  cfg.L0 = 10;
  cfg.l0 = 100;
  cfg.h0 = 7.0;
  cfg.ledger = &led;
  return cfg;
}

}  // namespace

TEST_CASE("scale tower gives exact decimal side lengths") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);

  CHECK(renorm::scales(cfg, 0) == "10");
  CHECK(renorm::scales(cfg, 1) == "1000");
  CHECK(renorm::scales(cfg, 3) == "10000000");
  CHECK(renorm::scales(cfg, 13) == "1" + std::string(27, '0'));

  const ConstantsLedger led2 = ConstantsLedger::defaults(3, 7, 101);
  RenormConfig odd = cfg;
  odd.L0 = 7;
  odd.l0 = 101;
  odd.ledger = &led2;
  CHECK(renorm::scales(odd, 2) == "71407");

  for (int n = 0; n <= 9; ++n)
    CHECK(renorm::scales(odd, n) == dec_mul(dec_pow(101, n), 7));

  CHECK(renorm::scales(cfg, 50) == "1" + std::string(101, '0'));
  CHECK_THROWS_AS(renorm::scales(cfg, -1), std::invalid_argument);
}

TEST_CASE("constants ledger reproduces its defining formulas") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);

  CHECK(led.B.value == doctest::Approx(3.0 / (1.0 - std::exp(-1.0)))
                           .epsilon(1e-15));
  CHECK(led.B.value == doctest::Approx(4.745933).epsilon(1e-5));
  CHECK(led.B.provenance == "paper-symbolic");

  CHECK(led.c2.value ==
        doctest::Approx(1.0 + 1.0 / (6.0 * std::log(30.0))).epsilon(1e-15));
  CHECK(led.g0.value == doctest::Approx(1.516386059151978).epsilon(1e-9));

  CHECK(led.separation.value == doctest::Approx(0.46).epsilon(1e-15));
  CHECK(led.c1.value ==
        doctest::Approx(std::sqrt(2.0 * led.g0.value) * led.cap_ratio.value *
                        led.green_sup.value / led.separation.value)
            .epsilon(1e-12));

  // branching constant from the stabilized per-node counts
  CHECK(led.c0.value ==
        doctest::Approx(58808.0 * 237608.0 / 1e8).epsilon(1e-12));

  for (const auto* e : {&led.c0, &led.c1, &led.c2, &led.g0, &led.cap_ratio,
                        &led.green_sup, &led.separation})
    CHECK(e->provenance == "numeric-default");

  CHECK_THROWS_AS(ConstantsLedger::defaults(2, 10, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConstantsLedger::defaults(3, 10, 3),
                  std::invalid_argument);
}

TEST_CASE("green function supremum covers the scan family") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);

  // nearest neighbor value satisfies g(e1) = g(0) - 1, so the scaled
  // product there is g(0) - 1 and the supremum must reach it
  CHECK(led.green_sup.value >= led.g0.value - 1.0 - 1e-9);

  double best = 0.0;
  std::vector<lattice::Point> family;
  for (long r = 1; r <= 8; ++r) family.push_back({r, 0, 0});
  for (long r = 1; r <= 4; ++r) family.push_back({r, r, 0});
  for (long r = 1; r <= 2; ++r) family.push_back({r, r, r});
  for (const auto& x : family) {
    const double g = greens::green_quadrature(3, x).value;
    best = std::max(best, g * static_cast<double>(lattice::linf(x)));
  }
  CHECK(led.green_sup.value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("child shell counts match a direct enumeration") {
  for (long l0 : {4L, 5L, 6L}) {
    const ConstantsLedger led = ConstantsLedger::defaults(3, 1, l0);
    RenormConfig cfg;
    cfg.L0 = 1;
    cfg.l0 = l0;
    cfg.ledger = &led;
    const renorm::TreeCount tc = renorm::tree_counts(cfg, 2);

    CHECK(tc.h1 == h1_oracle_3d(l0));
    CHECK(tc.h1 == static_cast<std::uint64_t>(l0 * l0 * l0 -
                                              (l0 - 2) * (l0 - 2) * (l0 - 2)));
    REQUIRE(tc.h2.size() == 2);
    CHECK(tc.h2[0] == h2_oracle_3d(1, l0, 1));
    CHECK(tc.h2[1] == h2_oracle_3d(1, l0, 2));
  }

  // wider seed boxes shift the child grid against the shell
  const ConstantsLedger led = ConstantsLedger::defaults(3, 2, 4);
  RenormConfig cfg;
  cfg.L0 = 2;
  cfg.l0 = 4;
  cfg.ledger = &led;
  const renorm::TreeCount tc = renorm::tree_counts(cfg, 2);
  CHECK(tc.h2[0] == h2_oracle_3d(2, 4, 1));
  CHECK(tc.h2[1] == h2_oracle_3d(2, 4, 2));
}

TEST_CASE("per node counts stabilize across levels at the base geometry") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const renorm::TreeCount tc = renorm::tree_counts(cfg, 5);
  CHECK(tc.h1 == 58808);
  for (const std::uint64_t v : tc.h2) CHECK(v == 237608);
}

TEST_CASE("exact tree counts multiply out the per node factors") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);

  const renorm::TreeCount t0 = renorm::tree_counts(cfg, 0);
  REQUIRE(t0.exact.has_value());
  CHECK(*t0.exact == "1");

  const renorm::TreeCount t1 = renorm::tree_counts(cfg, 1);
  REQUIRE(t1.exact.has_value());
  CHECK(*t1.exact == dec_mul(std::to_string(t1.h1), t1.h2[0]));

  const renorm::TreeCount t2 = renorm::tree_counts(cfg, 2);
  REQUIRE(t2.exact.has_value());
  {
    // product over levels of (h1 h2(k))^(2^(n-k)) assembled by the oracle
    const std::uint64_t per1 = t2.h1 * t2.h2[0];
    const std::uint64_t per2 = t2.h1 * t2.h2[1];
    std::string want = "1";
    want = dec_mul(want, per1);
    want = dec_mul(want, per1);
    want = dec_mul(want, per2);
    CHECK(*t2.exact == want);
    CHECK(*t2.exact == "2728301774878275513018915487744");
  }

  const renorm::TreeCount t3 = renorm::tree_counts(cfg, 3);
  REQUIRE(t3.exact.has_value());
  {
    std::string want = "1";
    for (int k = 1; k <= 3; ++k) {
      const std::uint64_t per =
          t3.h1 * t3.h2[static_cast<std::size_t>(k - 1)];
      for (int r = 0; r < (1 << (3 - k)); ++r) want = dec_mul(want, per);
    }
    CHECK(*t3.exact == want);
  }

  // small geometries, exactness certified by the disjointness criterion
  for (long l0 : {4L, 5L, 6L}) {
    const ConstantsLedger small = ConstantsLedger::defaults(3, 1, l0);
    RenormConfig c2;
    c2.L0 = 1;
    c2.l0 = l0;
    c2.ledger = &small;
    const renorm::TreeCount tc = renorm::tree_counts(c2, 2);
    REQUIRE(tc.exact.has_value());
    const std::uint64_t per1 = tc.h1 * tc.h2[0];
    const std::uint64_t per2 = tc.h1 * tc.h2[1];
    std::string want = "1";
    want = dec_mul(want, per1);
    want = dec_mul(want, per1);
    want = dec_mul(want, per2);
    CHECK(*tc.exact == want);
  }
}

TEST_CASE("exact counting declines when descendant clusters can meet") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 2, 4);
  RenormConfig cfg;
  cfg.L0 = 2;
  cfg.l0 = 4;
  cfg.ledger = &led;
  const renorm::TreeCount tc = renorm::tree_counts(cfg, 2);
  CHECK(!tc.exact.has_value());
  CHECK(tc.exact_note.find("not certified") != std::string::npos);
}

TEST_CASE("tree count bound follows the ledger branching constant") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  for (int n : {0, 1, 2, 5, 30}) {
    const renorm::TreeCount tc = renorm::tree_counts(cfg, n);
    const double want = std::ldexp(1.0, n) *
                        (std::log(led.c0.value) + 4.0 * std::log(100.0));
    CHECK(tc.log_bound == doctest::Approx(want).epsilon(1e-12));
    if (want < 700.0)
      CHECK(tc.bound == doctest::Approx(std::exp(want)).epsilon(1e-9));
    else
      CHECK(tc.bound == kInf);
  }
  CHECK_THROWS_AS(renorm::tree_counts(cfg, 4, 5), std::invalid_argument);
  RenormConfig bare = cfg;
  bare.ledger = nullptr;
  CHECK_THROWS_AS(renorm::tree_counts(bare, 1), std::invalid_argument);
}

TEST_CASE("recursion start constant and maximum bound recompute") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);

  const double k0 = renorm::k0_constant(cfg);
  CHECK(k0 == doctest::Approx(std::log(2.0 * led.c0.value) +
                              4.0 * std::log(100.0) + led.B.value)
                  .epsilon(1e-12));

  for (int n : {0, 1, 7}) {
    const double want =
        led.c2.value *
        std::sqrt(n * std::numbers::ln2 + 3.0 * std::log(30.0));
    CHECK(renorm::m_bound(cfg, n) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("beta sequence is increasing and matches its construction") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const double k0 = renorm::k0_constant(cfg);
  const std::vector<double> beta = renorm::beta_sequence(cfg, 40);
  REQUIRE(beta.size() == 41);

  for (std::size_t n = 0; n + 1 < beta.size(); ++n)
    CHECK(beta[n] < beta[n + 1]);

  for (int n = 0; n <= 40; ++n) {
    const double grow = std::exp2(0.5 * (n + 1)) *
                        (std::sqrt(static_cast<double>(n)) + std::sqrt(k0));
    const double want =
        renorm::m_bound(cfg, n) + std::sqrt(std::numbers::ln2) + grow;
    CHECK(beta[static_cast<std::size_t>(n)] ==
          doctest::Approx(want).epsilon(1e-12));
    CHECK(beta[static_cast<std::size_t>(n)] >= grow);
  }
}

TEST_CASE("level tower sums its increments and dominates the tail") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const renorm::LevelSequence lev = renorm::h_sequence(cfg, 12);
  REQUIRE(lev.h.size() == 13);
  CHECK(lev.h[0] == cfg.h0);

  const std::vector<double> beta = renorm::beta_sequence(cfg, 200);
  double acc = cfg.h0;
  for (int n = 0; n < 12; ++n) {
    acc += led.c1.value * beta[static_cast<std::size_t>(n)] *
           std::pow(0.02, n + 1);
    CHECK(lev.h[static_cast<std::size_t>(n + 1)] ==
          doctest::Approx(acc).epsilon(1e-12));
  }
  double full = cfg.h0;
  for (int n = 0; n < 200; ++n) {
    const double inc = led.c1.value * beta[static_cast<std::size_t>(n)] *
                       std::pow(0.02, n + 1);
    if (inc == 0.0) break;
    full += inc;
  }
  CHECK(lev.h_infinity == doctest::Approx(full).epsilon(1e-12));

  // geometric domination of the remainder, ratio 4 / l0
  for (int n = 1; n <= 7; ++n) {
    const double rem = lev.h_infinity - lev.h[static_cast<std::size_t>(n)];
    const double nxt =
        lev.h_infinity - lev.h[static_cast<std::size_t>(n + 1)];
    CHECK(nxt <= 0.04 * rem * (1.0 + 1e-6) + 1e-18);
  }
}

TEST_CASE("level tower with a trivial sprinkling constant stays flat") {
  ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  led.c1 = {0.0, "user-supplied", "disabled for the flat tower check"};
  RenormConfig cfg = base_config(led);
  const renorm::LevelSequence lev = renorm::h_sequence(cfg, 6);
  for (const double h : lev.h) CHECK(h == cfg.h0);
  CHECK(lev.h_infinity == cfg.h0);
}

TEST_CASE("level tower recomputes under user supplied unit constants") {
  ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  led.c0 = {1.0, "user-supplied", "unit"};
  led.c1 = {1.0, "user-supplied", "unit"};
  led.c2 = {1.0, "user-supplied", "unit"};
  RenormConfig cfg = base_config(led);
  cfg.h0 = 2.0;

  const double k0 = std::log(2.0) + 4.0 * std::log(100.0) + led.B.value;
  CHECK(renorm::k0_constant(cfg) == doctest::Approx(k0).epsilon(1e-14));

  const renorm::LevelSequence lev = renorm::h_sequence(cfg, 10);
  double acc = 2.0;
  for (int n = 0; n <= 10; ++n) {
    CHECK(lev.h[static_cast<std::size_t>(n)] ==
          doctest::Approx(acc).epsilon(1e-12));
    const double beta =
        std::sqrt(n * std::numbers::ln2 + 3.0 * std::log(30.0)) +
        std::sqrt(std::numbers::ln2) +
        std::exp2(0.5 * (n + 1)) *
            (std::sqrt(static_cast<double>(n)) + std::sqrt(k0));
    acc += beta * std::pow(0.02, n + 1);
  }
}

TEST_CASE("decay rate sequence stays within its budget and chains") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const double k0 = renorm::k0_constant(cfg);
  const std::vector<double> K = renorm::k_sequence(cfg, 20);
  const std::vector<double> beta = renorm::beta_sequence(cfg, 20);
  REQUIRE(K.size() == 21);

  CHECK(K[0] == doctest::Approx(k0).epsilon(1e-15));
  for (std::size_t n = 0; n + 1 < K.size(); ++n) {
    CHECK(K[n + 1] <= K[n]);
    CHECK(K[n + 1] >= k0 - led.B.value - 1e-9);
  }
  CHECK(K[20] == doctest::Approx(K[12]).epsilon(1e-12));

  // the closed form update, recomputed term by term, and the chain it
  // guarantees: squaring the level-n bound and adding the sprinkling cost
  // must stay under the level-(n+1) bound
  for (int n = 0; n <= 18; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double ex = beta[i] - renorm::m_bound(cfg, n);
    const double t =
        K[i] + std::exp2(-(n + 1.0)) * (std::log(3.0) - ex * ex);
    CHECK(K[i + 1] ==
          doctest::Approx(K[i] - std::log1p(std::exp(t))).epsilon(1e-12));

    const double scale = std::ldexp(1.0, n + 1);
    const double lhs = logaddexp(-K[i] * scale, std::log(3.0) - ex * ex);
    const double rhs = -K[i + 1] * scale;
    CHECK(lhs <= rhs + 1e-7 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("squared beta excess clears the dyadic budget") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const double k0 = renorm::k0_constant(cfg);
  const std::vector<double> beta = renorm::beta_sequence(cfg, 20);
  for (int n = 0; n <= 20; ++n) {
    const double ex = beta[static_cast<std::size_t>(n)] -
                      renorm::m_bound(cfg, n);
    CHECK(ex * ex >=
          std::numbers::ln2 + std::ldexp(1.0, n + 1) * (n + k0) - 1e-9);
  }
}

TEST_CASE("certification runs the full trace from a passing seed") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const double k0 = renorm::k0_constant(cfg);

  const renorm::RecursionTrace tr =
      renorm::certify_from_seed(cfg, {-k0, "analytic"}, 14);
  CHECK(tr.valid);
  CHECK(tr.provenance == "analytic-conditional");
  CHECK(tr.K0 == doctest::Approx(k0).epsilon(1e-15));
  CHECK(tr.log_p0 == -k0);
  REQUIRE(tr.L_n.size() == 15);
  REQUIRE(tr.log_p_n.size() == 15);

  const std::vector<double> K = renorm::k_sequence(cfg, 14);
  const std::vector<double> beta = renorm::beta_sequence(cfg, 14);
  const renorm::LevelSequence lev = renorm::h_sequence(cfg, 14);
  for (int n = 0; n <= 14; ++n) {
    const auto i = static_cast<std::size_t>(n);
    CHECK(tr.L_n[i] == renorm::scales(cfg, n));
    CHECK(tr.M_n[i] == doctest::Approx(renorm::m_bound(cfg, n))
                           .epsilon(1e-15));
    CHECK(tr.beta_n[i] == doctest::Approx(beta[i]).epsilon(1e-15));
    CHECK(tr.h_n[i] == doctest::Approx(lev.h[i]).epsilon(1e-15));
    CHECK(tr.K_n[i] == doctest::Approx(K[i]).epsilon(1e-15));
    // decay never falls behind the guaranteed floor K0 - B
    CHECK(tr.log_p_n[i] <=
          -(k0 - led.B.value) * std::ldexp(1.0, n) * (1.0 - 1e-12));
    CHECK(tr.log_p_n[i] <=
          -K[i] * std::ldexp(1.0, n) * (1.0 - 1e-12));
  }
  CHECK(tr.h_infinity == doctest::Approx(lev.h_infinity).epsilon(1e-15));

  // iterate the squaring recursion independently
  double cur = -k0;
  for (int n = 0; n <= 13; ++n) {
    CHECK(tr.log_p_n[static_cast<std::size_t>(n)] ==
          doctest::Approx(cur).epsilon(1e-12));
    const double ex = beta[static_cast<std::size_t>(n)] -
                      renorm::m_bound(cfg, n);
    cur = logaddexp(2.0 * cur, std::log(3.0) - ex * ex);
  }

  // a strictly better seed keeps every level below the standard bound
  const renorm::RecursionTrace deep =
      renorm::certify_from_seed(cfg, {-2.0 * k0, "analytic"}, 14);
  CHECK(deep.valid);
  for (int n = 0; n <= 14; ++n)
    CHECK(deep.log_p_n[static_cast<std::size_t>(n)] <=
          -K[static_cast<std::size_t>(n)] * std::ldexp(1.0, n) *
              (1.0 - 1e-12));
}

TEST_CASE("certification refuses a seed above the gate") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const double k0 = renorm::k0_constant(cfg);

  const renorm::RecursionTrace tr = renorm::certify_from_seed(
      cfg, {-k0 + std::numbers::ln2, "analytic"}, 10);
  CHECK(!tr.valid);
  CHECK(tr.log_p_n.empty());
  CHECK(tr.L_n.size() == 11);
  CHECK(tr.K_n.size() == 11);

  const renorm::RecursionTrace mc =
      renorm::certify_from_seed(cfg, {-k0 - 1.0, "mc"}, 4);
  CHECK(mc.valid);
  CHECK(mc.provenance == "empirical");
  const renorm::RecursionTrace hand =
      renorm::certify_from_seed(cfg, {-k0 - 1.0, "hand"}, 4);
  CHECK(hand.provenance == "hand");
}

TEST_CASE("an impossible seed event stays impossible along the tree") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const renorm::RecursionTrace tr =
      renorm::certify_from_seed(cfg, {-kInf, "analytic"}, 8);
  CHECK(tr.valid);
  for (const double v : tr.log_p_n) CHECK(v == -kInf);

  const renorm::RecursionTrace gen =
      renorm::generic_recursion(cfg, 0.0, Direction::increasing, 8);
  CHECK(gen.valid);
  for (const double v : gen.log_p_n) CHECK(v == -kInf);
}

TEST_CASE("generic recursion shares the certified arithmetic") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const double k0 = renorm::k0_constant(cfg);

  const renorm::RecursionTrace cert =
      renorm::certify_from_seed(cfg, {-k0, "analytic"}, 12);
  const renorm::RecursionTrace gen = renorm::generic_recursion(
      cfg, std::exp(-k0), Direction::increasing, 12);
  CHECK(gen.valid);
  CHECK(gen.provenance == "generic-increasing");
  REQUIRE(gen.log_p_n.size() == cert.log_p_n.size());
  for (std::size_t i = 0; i < gen.log_p_n.size(); ++i)
    CHECK(gen.log_p_n[i] == doctest::Approx(cert.log_p_n[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < gen.h_n.size(); ++i)
    CHECK(gen.h_n[i] == cert.h_n[i]);

  // first step of the squaring recursion, spelled out
  const std::vector<double> beta = renorm::beta_sequence(cfg, 3);
  const double ex0 = beta[0] - renorm::m_bound(cfg, 0);
  const renorm::RecursionTrace q =
      renorm::generic_recursion(cfg, 0.37, Direction::increasing, 3);
  CHECK(q.log_p_n[0] == doctest::Approx(std::log(0.37)).epsilon(1e-14));
  CHECK(q.log_p_n[1] ==
        doctest::Approx(logaddexp(2.0 * std::log(0.37),
                                  std::log(3.0) - ex0 * ex0))
            .epsilon(1e-12));

  CHECK_THROWS_AS(
      renorm::generic_recursion(cfg, 1.5, Direction::increasing, 3),
      std::invalid_argument);
  CHECK_THROWS_AS(
      renorm::generic_recursion(cfg, -0.1, Direction::increasing, 3),
      std::invalid_argument);
}

TEST_CASE("decreasing direction reflects the level tower") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);
  const renorm::RecursionTrace up =
      renorm::generic_recursion(cfg, 0.1, Direction::increasing, 8);
  const renorm::RecursionTrace down =
      renorm::generic_recursion(cfg, 0.1, Direction::decreasing, 8);
  CHECK(down.provenance == "generic-decreasing");
  CHECK(down.h_n[0] == cfg.h0);
  for (std::size_t i = 0; i < up.h_n.size(); ++i)
    CHECK(down.h_n[i] ==
          doctest::Approx(2.0 * cfg.h0 - up.h_n[i]).epsilon(1e-15));
  CHECK(down.h_infinity ==
        doctest::Approx(2.0 * cfg.h0 - up.h_infinity).epsilon(1e-15));
  for (std::size_t i = 0; i < up.log_p_n.size(); ++i)
    CHECK(down.log_p_n[i] == up.log_p_n[i]);
}

TEST_CASE("seed bound formula, monotonicity, and refusal region") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig cfg = base_config(led);

  const double g0 = led.g0.value;
  const double A = std::sqrt(2.0 * g0 * 3.0 * std::log(30.0));
  const double emax = A + g0 / A;

  double prev = 1.0;
  for (double h0 : {6.0, 7.0, 9.0, 12.0, 16.0}) {
    RenormConfig c = cfg;
    c.h0 = h0;
    const double p = renorm::p0_upper_bound(c);
    const double want =
        std::exp(-(h0 - emax) * (h0 - emax) / (2.0 * g0));
    CHECK(p == doctest::Approx(want).epsilon(1e-12));
    CHECK(p < prev);
    prev = p;
  }

  RenormConfig low = cfg;
  low.h0 = 5.0;
  try {
    renorm::p0_upper_bound(low);
    CHECK(false);
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("increase h0") != std::string::npos);
  }
}

TEST_CASE("expected maximum bound dominates sampled maxima") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  const double g0 = led.g0.value;
  const double A = std::sqrt(2.0 * g0 * 3.0 * std::log(30.0));
  const double emax = A + g0 / A;

  // draws on a side 60 box, maxima read off the central 30^3 block where
  // the zero boundary barely depresses the variance
  const lattice::Window w(lattice::Box::attached(lattice::origin(3), 60));
  std::vector<std::size_t> central;
  w.for_each([&](std::size_t idx, const lattice::Coord* c) {
    if (c[0] >= 15 && c[0] < 45 && c[1] >= 15 && c[1] < 45 && c[2] >= 15 &&
        c[2] < 45)
      central.push_back(idx);
  });
  REQUIRE(central.size() == 27000u);

  gff::BoxSampler bs(w);
  stats::Accumulator acc;
  for (std::uint64_t s = 0; s < 120; ++s) {
    const gff::ScalarField f = bs.draw(424242, s);
    double m = -kInf;
    for (const std::size_t idx : central) m = std::max(m, f.values[idx]);
    acc.add(m);
  }
  CHECK(acc.mean() + 4.0 * acc.se_mean() < emax);
  CHECK(acc.mean() > 4.5);
}

TEST_CASE("dyadic scale exponent") {
  CHECK(renorm::rho_exponent(100) ==
        doctest::Approx(0.15051499783199057).epsilon(1e-9));
  CHECK(renorm::rho_exponent(100) ==
        doctest::Approx(std::numbers::ln2 / std::log(100.0)).epsilon(1e-15));
  CHECK(renorm::rho_exponent(2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(renorm::rho_exponent(1), std::invalid_argument);
}

TEST_CASE("perturbation tail kernel decreases past one half") {
  CHECK(renorm::vtilde(0.5) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(renorm::vtilde(5.0) ==
        doctest::Approx(std::sqrt(10.0 * std::numbers::e) * std::exp(-5.0))
            .epsilon(1e-14));
  CHECK(renorm::vtilde(5.0) == doctest::Approx(0.035130).epsilon(1e-4));

  const double grid[] = {0.6, 1.0, 2.0, 3.0, 5.0, 10.0};
  for (std::size_t i = 0; i + 1 < 6; ++i)
    CHECK(renorm::vtilde(grid[i + 1]) < renorm::vtilde(grid[i]));
  for (const double u : grid) {
    CHECK(renorm::vtilde(u) < 1.0);
    CHECK(renorm::vtilde(u) > 0.0);
  }
  CHECK(renorm::vtilde(0.25) > 0.0);
  CHECK_THROWS_AS(renorm::vtilde(0.0), std::invalid_argument);
  CHECK_THROWS_AS(renorm::vtilde(-1.0), std::invalid_argument);
}

TEST_CASE("joint perturbation tail bound recomputes per site") {
  const double rb10 = greens::highdim_scalars(10).rho_bound;
  const double u = 9.0 / (2.0 * rb10);
  CHECK(u > 0.5);
  CHECK(renorm::xi_tail_bound(10, 3.0, 1) ==
        doctest::Approx(renorm::vtilde(u)).epsilon(1e-12));
  CHECK(renorm::xi_tail_bound(10, 3.0, 8) ==
        doctest::Approx(std::pow(renorm::vtilde(u), 8.0)).epsilon(1e-12));

  CHECK_THROWS_AS(renorm::xi_tail_bound(5, 3.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(renorm::xi_tail_bound(10, 3.0, 0), std::invalid_argument);
  try {
    renorm::xi_tail_bound(10, 0.5, 1);
    CHECK(false);
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("regime not applicable") !=
          std::string::npos);
  }
}

TEST_CASE("contour sums evaluate exactly and beat the dyadic rate") {
  CHECK(renorm::peierls_sum(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(renorm::peierls_sum(3) == doctest::Approx(0.064).epsilon(1e-15));
  for (int n = 1; n <= 60; ++n) {
    const double v = renorm::peierls_sum(n);
    CHECK(v == doctest::Approx(std::pow(0.4, n)).epsilon(1e-12));
    CHECK(v < std::ldexp(1.0, -n));
  }
  CHECK(renorm::peierls_tail(2) == doctest::Approx(4.0 / 15.0).epsilon(1e-15));
  CHECK(renorm::peierls_tail(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(renorm::peierls_sum(0), std::invalid_argument);
  CHECK_THROWS_AS(renorm::peierls_sum(5001), std::invalid_argument);
}

TEST_CASE("slab dimension search agrees with a direct gate scan") {
  renorm::SlabOptions opt;
  opt.pc_site = 0.3116;
  opt.run_mc = false;
  const renorm::SlabReport rep = renorm::slab_pipeline(0.25, 2, opt);
  CHECK(rep.message == "ok");
  CHECK(rep.d0 == 7617);

  // the gate value, recomputed without the pipeline
  const auto gate = [](double h0, long L0, int d) {
    const double rb = greens::highdim_scalars(d).rho_bound;
    const double u = h0 * h0 / (2.0 * rb);
    if (!(u > 0.5)) return kInf;
    return std::pow(2.0 * static_cast<double>(L0), 3.0) *
           std::pow(renorm::vtilde(u), 0.25);
  };
  CHECK(gate(0.25, 2, rep.d0) <= 1.0 / 40.0);
  CHECK(gate(0.25, 2, rep.d0 - 1) > 1.0 / 40.0);
  CHECK(gate(0.25, 2, 7000) > 1.0 / 40.0);
  CHECK(gate(0.25, 2, 9000) <= 1.0 / 40.0);

  CHECK(rep.target_p == doctest::Approx(0.5 * (0.5 + 0.3116)).epsilon(1e-15));
  CHECK(rep.seed_level_p ==
        doctest::Approx(stats::normal_tail(2.0 * 0.25 * std::sqrt(2.0)))
            .epsilon(1e-12));
  CHECK(rep.pc_site_provenance == "user-supplied");
  REQUIRE(rep.gates.size() == 2);
  CHECK(rep.gates[1].name == "perturbation-tail");
  CHECK(rep.gates[1].satisfied);
  CHECK(rep.gates[1].kind == "analytic");

  // raising the seed level can only shrink the required dimension
  renorm::SlabOptions quiet = opt;
  int prev = rep.d0;
  for (double h0 : {0.35, 0.5}) {
    const renorm::SlabReport r = renorm::slab_pipeline(h0, 2, quiet);
    CHECK(r.d0 >= 6);
    CHECK(r.d0 <= prev);
    prev = r.d0;
  }
}

TEST_CASE("slab pipeline reports when no dimension can close the gate") {
  renorm::SlabOptions opt;
  opt.pc_site = 0.3116;
  opt.run_mc = false;
  const renorm::SlabReport rep = renorm::slab_pipeline(1e-4, 1, opt);
  CHECK(rep.d0 == -1);
  CHECK(rep.message == "h0 too small for this L0");
  CHECK(!rep.gates[1].satisfied);

  CHECK_THROWS_AS(renorm::slab_pipeline(0.0, 1, opt), std::invalid_argument);
  CHECK_THROWS_AS(renorm::slab_pipeline(1.0, 0, opt), std::invalid_argument);
  renorm::SlabOptions bad;
  bad.pc_site = 1.2;
  CHECK_THROWS_AS(renorm::slab_pipeline(1.0, 1, bad), std::invalid_argument);
}

TEST_CASE("slab pipeline runs the empirical gates on a small block") {
  renorm::SlabOptions opt;
  opt.pc_site = 0.3116;
  opt.mc_samples = 300;
  opt.seed = 7;
  const renorm::SlabReport rep = renorm::slab_pipeline(1.0, 1, opt);
  CHECK(rep.message == "ok");
  CHECK(rep.d0 == 358);
  REQUIRE(rep.gates.size() == 5);
  CHECK(rep.gates[2].name == "seed-level-density-mc");
  CHECK(rep.gates[2].kind == "empirical");
  CHECK(rep.gates[3].name == "dominant-block-density");
  CHECK(rep.gates[4].name == "perturbation-block-mc");
  CHECK(rep.gates[4].kind == "empirical");

  // at this seed level the one site tail is about 0.0023, so the density
  // gates must fail while the perturbation gate holds easily
  CHECK(!rep.gates[0].satisfied);
  CHECK(!rep.gates[2].satisfied);
  CHECK(rep.gates[4].satisfied);
  CHECK(rep.gates[4].value <= rep.gates[4].threshold);

  // beyond the dimension cap the perturbation draw is skipped, not faked
  renorm::SlabOptions capped;
  capped.pc_site = 0.3116;
  capped.mc_samples = 100;
  capped.mc_dim_cap = 2000;
  const renorm::SlabReport far = renorm::slab_pipeline(0.25, 2, capped);
  CHECK(far.d0 == 7617);
  REQUIRE(far.gates.size() == 5);
  CHECK(far.gates[4].note.find("skipped") != std::string::npos);
}

TEST_CASE("slab pipeline estimates the site threshold when not supplied") {
  renorm::SlabOptions opt;
  opt.pc_sizes = {4, 6, 8};
  opt.pc_samples = 60;
  opt.run_mc = false;
  opt.seed = 3;
  const renorm::SlabReport rep = renorm::slab_pipeline(1.0, 1, opt);
  CHECK(rep.pc_site_provenance == "estimated");
  CHECK(rep.pc_site > 0.15);
  CHECK(rep.pc_site < 0.5);
  CHECK(rep.target_p ==
        doctest::Approx(0.5 * (0.5 + rep.pc_site)).epsilon(1e-15));
}

TEST_CASE("recursion entry points validate their geometry") {
  const ConstantsLedger led = ConstantsLedger::defaults(3, 10, 100);
  RenormConfig small = base_config(led);
  small.l0 = 99;
  CHECK_THROWS_AS(renorm::k0_constant(small), std::invalid_argument);
  CHECK_THROWS_AS(renorm::beta_sequence(small, 4), std::invalid_argument);
  CHECK_THROWS_AS(renorm::h_sequence(small, 4), std::invalid_argument);
  CHECK_THROWS_AS(renorm::k_sequence(small, 4), std::invalid_argument);
  CHECK_THROWS_AS(renorm::certify_from_seed(small, {-1.0, "analytic"}, 4),
                  std::invalid_argument);

  RenormConfig flat = base_config(led);
  flat.h0 = 0.0;
  CHECK_THROWS_AS(renorm::h_sequence(flat, 4), std::invalid_argument);

  RenormConfig cfg = base_config(led);
  CHECK_THROWS_AS(renorm::beta_sequence(cfg, 400), std::invalid_argument);
  CHECK_THROWS_AS(renorm::beta_sequence(cfg, -1), std::invalid_argument);

  RenormConfig lowdim = base_config(led);
  lowdim.d = 2;
  CHECK_THROWS_AS(renorm::tree_counts(lowdim, 1), std::invalid_argument);
}
