#pragma once

// Exact finite-n expectations for the r-th left-to-right record counted from
// the right: phi/tau/g/psi kernels, the alternating binomial sums, and
// n-sweeps that share kernel tables across word lengths.
//
// All alternating sums lose about n bits to cancellation (sum of |terms| is
// ~2^n times the result), so evaluation precision is raised to at least
// n + guard bits and revalidated by comparing magnitude exponents.

#include "qr/qkernel.hpp"

#include <functional>
#include <vector>

namespace qr::exactmeans {

enum class StatKind { value, leftCount };

struct ExactMean {
    long r = 0;
    long n = 0;
    StatKind kind = StatKind::value;
    Real mean{64};
    long precisionBits = 0;
};

// Sum_{k=kStart}^{n} binom(n,k) * sign(k) * term(k), sign(k) = (-1)^k, or
// (-1)^{k-1} when positiveOddK is set.  `term` is called with the working
// precision and must produce its value at that precision.
struct AltSumSpec {
    long n = 0;
    long kStart = 1;
    std::function<Real(long k, long prec)> term;
    long guardBits = 64;
    bool positiveOddK = false;
};

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

// phi_r(k): direct chain sum for small binom(k-1, r-1), else the
// x-coefficient form over truncated polynomials; 0 for k < r.
Real phi(long r, long k, const GeomModel& model, const PrecisionContext& ctx);

// tau(k, m) closed form; integer overload requires k >= 2, the real overload
// supports the analytic extension and rejects the poles z in {0, 1}.
Real tau(long k, long m, const GeomModel& model);
Real tau(const Real& z, long m, const GeomModel& model);

// g_s(l): chain sum with s factors below l, via [x^s] of the finite
// Pochhammer ratio; g_0 = 1, g_s(l) = 0 for l <= s.
Real gChain(long s, long l, const GeomModel& model);

// psi_r(k) = sum_{l=r-1}^{k-2} g_{r-2}(l) tau(k,l)/(Q^l-1), r >= 2;
// psi_1(k) = tau(k, 0).  k < 2 rejected.
Real psi(long r, long k, const GeomModel& model, const PrecisionContext& ctx);

// ---------------------------------------------------------------------------
// Alternating sums and expectations
// ---------------------------------------------------------------------------

// Deterministic evaluation with exact integer binomials.  The working
// precision starts at max(64, n + guardBits) and is raised automatically if
// the magnitude self-check shows fewer than 64 surviving bits.  The result
// carries the working precision; callers round as needed.
Real alternatingSum(const AltSumSpec& spec);

// E[value of the r-th record from the right] over words of n geometric
// letters; words with fewer than r records contribute 0.  n < r gives 0.
ExactMean expectedValueExact(long r, long n, const GeomModel& model, const PrecisionContext& ctx);

// E[number of letters strictly left of that record] (position minus one,
// 0 when the record does not exist).  n <= r gives 0.
ExactMean expectedPositionExact(long r, long n, const GeomModel& model, const PrecisionContext& ctx);

// Sweeps sharing one kernel table across all requested n (cost of the
// largest n only).  Results are returned in the order of `ns`.
std::vector<ExactMean> expectedValueSweep(long r, const std::vector<long>& ns,
                                          const GeomModel& model, const PrecisionContext& ctx);
std::vector<ExactMean> expectedPositionSweep(long r, const std::vector<long>& ns,
                                             const GeomModel& model, const PrecisionContext& ctx);

// ---------------------------------------------------------------------------
// Kernel tables (exposed for sweeps and cross-checks)
// ---------------------------------------------------------------------------

// f[k] = phi_r(k)/(1-q^k)^2 for k = 0..kmax (zero below k = r), computed by
// one incremental product update per k.
std::vector<Real> valueKernelTable(long r, long kmax, const GeomModel& model, long prec);

// psi_r(k) for k = 0..kmax (zero below k = r+1), computed with prefix sums
// in O(kmax * r) operations.
std::vector<Real> psiKernelTable(long r, long kmax, const GeomModel& model, long prec);

} // namespace qr::exactmeans
