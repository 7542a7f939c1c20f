#pragma once

// Exact-rational identity layer.
//
// Everything here works over mpq with q an exact rational in (0,1), so any
// two expressions that are claimed equal can be compared with ==, no
// tolerances involved.  The "extract*" functions recover coefficients of
// generating functions by brute-force series bookkeeping and serve as
// independent oracles for the closed forms next to them.

#include "qr/rational.hpp"
#include "qr/truncpoly.hpp"

#include <utility>

namespace qr::identities {

using XPoly = TruncPoly<Rat>;

// ---------------------------------------------------------------------------
// Finite q-products over rationals
// ---------------------------------------------------------------------------

// (a;q)_n as an exact rational.
Rat pochhammerRat(const Rat& a, const Rat& q, long n);

// prod_{i=1}^{n} (1 - (1-x) q^i) truncated at degree `deg` in x.
XPoly shiftedPochhammerPoly(const Rat& q, long n, long deg);

// ---------------------------------------------------------------------------
// Helper-sum identity (single descent barrier)
// ---------------------------------------------------------------------------

// Oracle: coefficient extraction for the double sum
//   sum_{h>=1} sum_{i=0}^{n-m-1} q^{-i} * h-term with total weight q^{hn},
// i.e. the w^n coefficient of the barrier generating function with barrier
// height m.  Requires 0 <= m <= n; returns 0 when n == m.
Rat extractHelperCoefficient(long n, long m, const Rat& q);

// Closed form (q/p) (q^m - q^n) / (1-q^n)^2 matched by the oracle.
Rat helperClosedForm(long n, long m, const Rat& q);

// ---------------------------------------------------------------------------
// tau: position-weighted barrier sum
// ---------------------------------------------------------------------------

// Oracle for the position kernel at integer arguments: extraction of the
// w^k coefficient in the two-barrier sum with inner barrier m <= k-2.
Rat extractTauCoefficient(long k, long m, const Rat& q);

// Closed form with all six terms put over the denominators (Q^{k-1}-1) and
// (Q^k-1); this is the variant our derivation confirms.
Rat tauClosedForm(long k, long m, const Rat& q);

// Alternative grouping that keeps (1-q^{k-1}) and (1-q^k) denominators on
// four of the six terms.  Kept only so the disagreement between the two
// groupings is itself a recorded, machine-checked fact.
Rat tauClosedFormUngrouped(long k, long m, const Rat& q);

// ---------------------------------------------------------------------------
// Chain sums and phi
// ---------------------------------------------------------------------------

// sum over chains 0 < i_1 < ... < i_s < j of prod_t 1/(Q^{i_t}-1).
// s = 0 gives 1 (empty chain); j <= s gives 0.
Rat chainSumDirect(long s, long j, const Rat& q);

// Same number via [x^s] of shiftedPochhammerPoly(q, j-1, s) / (q;q)_{j-1}.
Rat chainSumXForm(long s, long j, const Rat& q);

// phi_r(k) as the explicit chain sum
//   sum_{0 < l_1 < ... < l_{r-1} < k} prod 1/(Q^{l_t}-1) * (q^{l_{r-1}} - q^k),
// with phi_1(k) = 1 - q^k.  Zero for k < r.
Rat phiDirect(long r, long k, const Rat& q);

// phi_r(k) as a coefficient of the x-polynomial form:
//   -[x^{r-1}] { (q^k-1) ((1-x)q;q)_k/(q;q)_k + x q ((1-x)q^2;q)_{k-1}/(q;q)_{k-1} }.
Rat phiXForm(long r, long k, const Rat& q);

// Oracle for the full value inner sum: enumerates compositions of the record
// word profile and folds the nested geometric sums innermost-out.  Equals
// (q/p) * phi_r(k) / (1-q^k)^2 for k >= r; returns 0 for k < r.
Rat extractValueInnerSum(long r, long k, const Rat& q);

// (direct nested-sum phi, x-coefficient-form phi); the pair must be equal.
std::pair<Rat, Rat> phiFormsCheck(long r, long k, const Rat& q);

// ---------------------------------------------------------------------------
// Alternating-sum mean over rationals (small n only; cross-check use)
// ---------------------------------------------------------------------------

// sum_{k=1}^{n} binom(n,k) (-1)^{k-1} / (1-q^k): exact mean of the maximum's
// value for r = 1.  Cost grows with n; intended for n <= 64.
Rat firstRecordValueMeanRat(long n, const Rat& q);

} // namespace qr::identities
