// Exact integer helpers shared by the counting and ledger code.
#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace fieldperc::renorm::detail {

using BigInt = boost::multiprecision::cpp_int;

BigInt pow_big(long base, int exp);

// Natural log of a positive big integer, accurate to ~1e-14 relative.
double log_big(const BigInt& x);

// Number of level-(k-1) boxes contained in a level-k box and meeting its
// inner boundary: l0^d - (l0-2)^d.
BigInt h1_count(int d, long l0);

// Number of level-(k-1) boxes meeting the shell of sup-norm distance
// floor(L_k / 2) around a level-k box, with L_j = l0^j L0. Counted per
// axis: the shell condition factorizes through the coordinate-wise
// distance ranges of an axis-aligned box.
BigInt h2_count(int d, long L0, long l0, int k);

// Whether the per-node product over descendant choices counts depth-n
// trees exactly. True when, at every level, the descendant clusters of
// distinct nodes are separated by more than twice their maximal reach, so
// distinct choice tuples always produce distinct node sets.
bool tree_product_exact(long L0, long l0, int n);

}  // namespace fieldperc::renorm::detail
