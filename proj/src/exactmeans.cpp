#include "qr/exactmeans.hpp"

#include "qr/rational.hpp"
#include "qr/truncpoly.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>

namespace qr::exactmeans {

namespace {

using RPoly = TruncPoly<Real>;

// prod_{i=lo}^{hi} ((1 - q^i) + q^i x) truncated at degree deg.
RPoly shiftedPochRangeReal(const Real& q, long lo, long hi, long deg) {
    const long prec = q.prec();
    RPoly out = RPoly::constant(deg, Real(0, prec), Real(1, prec));
    Real qi = powi(q, lo);
    for (long i = lo; i <= hi; ++i) {
        out.mulLinearInPlace(1 - qi, qi);
        qi *= q;
    }
    return out;
}

// Shared tau body over an arbitrary (real) first argument.
Real tauBody(const Real& z, long m, const Real& q, const Real& p) {
    const Real qzm1 = pow(q, z - 1); // q^{z-1}
    const Real qz = qzm1 * q;        // q^z
    const Real u = qzm1 / (1 - qzm1);
    const Real v = qz / (1 - qz);
    const Real p2 = p * p;
    const Real qm1 = powi(q, m + 1);
    const Real qm2 = qm1 * q;
    const Real lin = z - (m + 1);
    const Real b1 = -(qm2 / p2) + qm1 * lin / p + q * q / p2;
    const Real b2 = qm2 / p2 - qm1 * lin / p - q / p2;
    return u * b1 + v * b2;
}

} // namespace

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

Real tau(long k, long m, const GeomModel& model) {
    if (k < 2) throw std::domain_error("tau: integer argument must be >= 2 (poles at 0 and 1)");
    if (m < 0) throw std::invalid_argument("tau: m must be >= 0");
    return tauBody(Real(k, model.bits), m, model.q, model.p);
}

Real tau(const Real& z, long m, const GeomModel& model) {
    if (m < 0) throw std::invalid_argument("tau: m must be >= 0");
    const long prec = std::max(z.prec(), model.bits);
    const Real zz(z);
    if (zz == Real(0, prec) || zz == Real(1, prec))
        throw std::domain_error("tau: argument hits a pole (z = 0 or z = 1)");
    return tauBody(zz, m, model.qAt(prec), model.pAt(prec));
}

Real gChain(long s, long l, const GeomModel& model) {
    if (s < 0 || l < 0) throw std::invalid_argument("gChain: negative argument");
    if (s == 0) return Real(1, model.bits);
    if (l <= s) return Real(0, model.bits);
    const RPoly num = shiftedPochRangeReal(model.q, 1, l - 1, s);
    const Real den = qPochhammerFinite(model.q, l - 1, model);
    return num[s] / den;
}

Real phi(long r, long k, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("phi: r must be >= 1");
    const long prec = ctx.bits;
    if (k < r) return Real(0, prec);
    const Real q = model.qAt(prec);
    const Real qk = powi(q, k);
    if (r == 1) return 1 - qk;
    const mpz_class pathSize = binomial(static_cast<unsigned long>(k - 1),
                                        static_cast<unsigned long>(r - 1));
    if (mpz_cmp_ui(pathSize.get_mpz_t(), 10000) <= 0) {
        // Direct chain sum: F(t, l) = chains of t factors below l.
        std::vector<Real> prev(static_cast<std::size_t>(k), Real(1, prec)); // t = 0
        std::vector<Real> cur;
        for (long t = 1; t <= r - 2; ++t) {
            cur.assign(static_cast<std::size_t>(k), Real(0, prec));
            for (long l = 1; l < k; ++l) {
                Real v = cur[static_cast<std::size_t>(l - 1)];
                if (l - 1 >= 1) {
                    const Real ql1 = powi(q, l - 1);
                    v += prev[static_cast<std::size_t>(l - 1)] * (ql1 / (1 - ql1));
                }
                cur[static_cast<std::size_t>(l)] = v;
            }
            prev = cur;
        }
        Real total(0, prec);
        for (long l = r - 1; l <= k - 1; ++l) {
            const Real ql = powi(q, l);
            total += prev[static_cast<std::size_t>(l)] * (ql / (1 - ql)) * (ql - qk);
        }
        return total;
    }
    // x-coefficient form.
    const long deg = r - 1;
    const RPoly A = shiftedPochRangeReal(q, 1, k, deg);
    const RPoly B = shiftedPochRangeReal(q, 2, k, deg);
    const Real ck = qPochhammerFinite(q, k, model);
    const Real cpk = qPochhammerFinite(q, k - 1, model);
    Real t = (qk - 1) * A[deg] / ck;
    t += q * B[deg - 1] / cpk;
    return -t;
}

Real psi(long r, long k, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("psi: r must be >= 1");
    if (k < 2) throw std::domain_error("psi: k must be >= 2");
    if (r == 1) return tau(k, 0, model);
    Real total(0, ctx.bits);
    const Real q = model.qAt(ctx.bits);
    for (long l = r - 1; l <= k - 2; ++l) {
        const Real ql = powi(q, l);
        total += gChain(r - 2, l, model) * tau(k, l, model) * (ql / (1 - ql));
    }
    return total;
}

// ---------------------------------------------------------------------------
// Kernel tables
// ---------------------------------------------------------------------------

std::vector<Real> valueKernelTable(long r, long kmax, const GeomModel& model, long prec) {
    if (r < 1) throw std::invalid_argument("valueKernelTable: r must be >= 1");
    if (kmax < 0) throw std::invalid_argument("valueKernelTable: kmax must be >= 0");
    std::vector<Real> out(static_cast<std::size_t>(kmax + 1), Real(0, prec));
    if (kmax < 1) return out;
    const Real q = model.qAt(prec);
    const Real p = 1 - q;
    const long deg = r - 1;
    RPoly A(deg, Real(0, prec));          // ((1-x)q;q)_k
    A[0] = p;
    if (deg >= 1) A[1] = q;
    RPoly Bp = RPoly::constant(deg, Real(0, prec), Real(1, prec)); // ((1-x)q^2;q)_{k-1}
    Real c = p;                            // (q;q)_k
    Real cp(1, prec);                      // (q;q)_{k-1}
    Real qk = q;                           // q^k
    for (long k = 1; k <= kmax; ++k) {
        if (k >= r) {
            Real val = (qk - 1) * A[deg] / c;
            if (deg >= 1) val += q * Bp[deg - 1] / cp;
            const Real om = 1 - qk;
            out[static_cast<std::size_t>(k)] = -val / (om * om);
        }
        if (k == kmax) break;
        const Real qk1 = qk * q;
        const Real a = 1 - qk1;
        A.mulLinearInPlace(a, qk1);
        Bp.mulLinearInPlace(a, qk1);
        cp = c;
        c = c * a;
        qk = qk1;
    }
    return out;
}

std::vector<Real> psiKernelTable(long r, long kmax, const GeomModel& model, long prec) {
    if (r < 1) throw std::invalid_argument("psiKernelTable: r must be >= 1");
    if (kmax < 0) throw std::invalid_argument("psiKernelTable: kmax must be >= 0");
    std::vector<Real> out(static_cast<std::size_t>(kmax + 1), Real(0, prec));
    const Real q = model.qAt(prec);
    const Real p = 1 - q;
    if (r == 1) {
        // psi_1(k) = tau(k, 0) = (q/p) [ (k-1)/(Q^{k-1}-1) - k/(Q^k-1) ].
        Real qk1 = q; // q^{k-1}
        const Real qOverP = q / p;
        for (long k = 2; k <= kmax; ++k) {
            const Real qk = qk1 * q;
            const Real u = qk1 / (1 - qk1);
            const Real v = qk / (1 - qk);
            out[static_cast<std::size_t>(k)] = qOverP * (u * (k - 1) - v * k);
            qk1 = qk;
        }
        return out;
    }
    // Prefix-sum sweep: w_l = g_{r-2}(l)/(Q^l-1); S0 = sum w_l, S1 = sum w_l q^l,
    // S2 = sum w_l l q^l over l = r-1 .. k-2, with the chain DP
    // g_t(l) = g_t(l-1) + g_{t-1}(l-1)/(Q^{l-1}-1) advanced incrementally.
    std::vector<Real> G(static_cast<std::size_t>(r - 1), Real(0, prec));
    G[0] = Real(1, prec); // g_0 = 1 at l = 0
    Real S0(0, prec), S1(0, prec), S2(0, prec);
    const Real c1 = q / p;
    const Real c2 = q * q / (p * p);
    const Real c3 = q / (p * p);
    long lCursor = 0;
    Real qlCursor(1, prec);  // q^{lCursor}
    Real qk1 = powi(q, r);   // q^{k-1} at k = r+1
    for (long k = r + 1; k <= kmax; ++k) {
        while (lCursor < k - 2) {
            ++lCursor;
            const long l = lCursor;
            // advance chain DP from l-1 to l
            if (l - 1 >= 1) {
                const Real prevQl = qlCursor; // still q^{l-1}
                const Real w1 = prevQl / (1 - prevQl);
                for (long t = r - 2; t >= 1; --t)
                    G[static_cast<std::size_t>(t)] += G[static_cast<std::size_t>(t - 1)] * w1;
            }
            qlCursor *= q; // now q^l
            const Real w = G[static_cast<std::size_t>(r - 2)] * (qlCursor / (1 - qlCursor));
            S0 += w;
            S1 += w * qlCursor;
            S2 += w * qlCursor * l;
        }
        const Real qk = qk1 * q;
        const Real u = qk1 / (1 - qk1);
        const Real v = qk / (1 - qk);
        const Real lin = S1 * (k - 1) - S2;
        out[static_cast<std::size_t>(k)] =
            u * (c2 * S0 + c1 * lin - c2 * S1) + v * (c2 * S1 - c1 * lin - c3 * S0);
        qk1 = qk;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Alternating sums
// ---------------------------------------------------------------------------

Real alternatingSum(const AltSumSpec& spec) {
    if (!spec.term) throw std::invalid_argument("alternatingSum: term function missing");
    if (spec.n < 0 || spec.kStart < 0)
        throw std::invalid_argument("alternatingSum: bad summation range");
    long workPrec = std::max<long>(64, spec.n + std::max<long>(spec.guardBits, 0));
    for (int attempt = 0; attempt < 4; ++attempt) {
        Real sum(0, workPrec);
        Real sumAbs(0, 64);
        mpz_class bin;
        mpz_bin_uiui(bin.get_mpz_t(), static_cast<unsigned long>(spec.n),
                     static_cast<unsigned long>(spec.kStart));
        for (long k = spec.kStart; k <= spec.n; ++k) {
            const Real t = spec.term(k, workPrec);
            const Real bt = Real(bin, workPrec) * t;
            const bool positive = ((k % 2 == 0) != spec.positiveOddK);
            if (positive) sum += bt;
            else sum -= bt;
            sumAbs += abs(bt);
            if (k < spec.n) {
                bin *= (spec.n - k);
                mpz_divexact_ui(bin.get_mpz_t(), bin.get_mpz_t(), static_cast<unsigned long>(k + 1));
            }
        }
        if (sum == Real(0, workPrec)) return sum; // exact cancellation (integer-exact terms)
        long lost = sumAbs.exponentCeil() - abs(sum).exponentCeil();
        if (lost < 0) lost = 0;
        if (workPrec - lost >= 64) return sum;
        workPrec = lost + 128;
    }
    throw std::runtime_error("alternatingSum: cancellation self-check kept failing");
}

// ---------------------------------------------------------------------------
// Expectations
// ---------------------------------------------------------------------------

namespace {

using TableBuilder = std::vector<Real> (*)(long, long, const GeomModel&, long);

// Shared machinery: alternating sum over a kernel table with caching per
// working precision (retries may raise it), then the sign/power prefactor.
Real tableAltSum(long r, long n, long kStart, long kmax, long guardBits,
                 const GeomModel& model, TableBuilder build,
                 long* precOut) {
    auto cache = std::make_shared<std::map<long, std::vector<Real>>>();
    AltSumSpec spec;
    spec.n = n;
    spec.kStart = kStart;
    spec.guardBits = guardBits;
    spec.term = [r, kmax, &model, build, cache](long k, long prec) -> Real {
        auto it = cache->find(prec);
        if (it == cache->end()) it = cache->emplace(prec, build(r, kmax, model, prec)).first;
        return it->second[static_cast<std::size_t>(k)];
    };
    const Real s = alternatingSum(spec);
    if (precOut) *precOut = s.prec();
    return s;
}

Real signedPowerPrefactor(const Real& base, long e, bool negate) {
    Real pf = powi(base, e);
    return negate ? -pf : pf;
}

} // namespace

ExactMean expectedValueExact(long r, long n, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("expectedValueExact: r must be >= 1");
    if (n < 0) throw std::invalid_argument("expectedValueExact: n must be >= 0");
    ExactMean em{r, n, StatKind::value, Real(0, ctx.bits), ctx.bits};
    if (n < r) return em;
    const long guard = std::max<long>(64, ctx.bits - n);
    long prec = 0;
    const Real s = tableAltSum(r, n, r, n, guard, model, &valueKernelTable, &prec);
    // prefactor (-1)^r (p/q)^{r-1}
    const Real pf = signedPowerPrefactor(model.pAt(prec) / model.qAt(prec), r - 1, r % 2 == 1);
    em.mean = pf * s;
    em.precisionBits = prec;
    return em;
}

ExactMean expectedPositionExact(long r, long n, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("expectedPositionExact: r must be >= 1");
    if (n < 0) throw std::invalid_argument("expectedPositionExact: n must be >= 0");
    ExactMean em{r, n, StatKind::leftCount, Real(0, ctx.bits), ctx.bits};
    if (n <= r) return em;
    const long guard = std::max<long>(64, ctx.bits - n);
    long prec = 0;
    const Real s = tableAltSum(r, n, r + 1, n, guard, model, &psiKernelTable, &prec);
    // prefactor (-1)^{r-1} (p/q)^r
    const Real pf = signedPowerPrefactor(model.pAt(prec) / model.qAt(prec), r, r % 2 == 0);
    em.mean = pf * s;
    em.precisionBits = prec;
    return em;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

namespace {

std::vector<ExactMean> sweepImpl(long r, const std::vector<long>& ns, const GeomModel& model,
                                 const PrecisionContext& ctx, StatKind kind) {
    std::vector<ExactMean> out;
    out.reserve(ns.size());
    long maxN = 0;
    for (long n : ns) maxN = std::max(maxN, n);
    const long kStartBase = (kind == StatKind::value) ? 0 : 1; // kStart = r + base
    TableBuilder build = (kind == StatKind::value) ? &valueKernelTable : &psiKernelTable;
    auto cache = std::make_shared<std::map<long, std::vector<Real>>>();
    for (long n : ns) {
        if (n < 0) throw std::invalid_argument("sweep: n must be >= 0");
        ExactMean em{r, n, kind, Real(0, ctx.bits), ctx.bits};
        const long minN = (kind == StatKind::value) ? r : r + 1;
        if (n >= minN) {
            AltSumSpec spec;
            spec.n = n;
            spec.kStart = r + kStartBase;
            // Uniform working precision across the sweep so one kernel table serves all n.
            spec.guardBits = std::max<long>(std::max<long>(64, ctx.bits - n), maxN - n + 64);
            spec.term = [r, maxN, &model, build, cache](long k, long prec) -> Real {
                auto it = cache->find(prec);
                if (it == cache->end())
                    it = cache->emplace(prec, build(r, maxN, model, prec)).first;
                return it->second[static_cast<std::size_t>(k)];
            };
            const Real s = alternatingSum(spec);
            const long prec = s.prec();
            const bool negate = (kind == StatKind::value) ? (r % 2 == 1) : (r % 2 == 0);
            const long e = (kind == StatKind::value) ? r - 1 : r;
            const Real pf = signedPowerPrefactor(model.pAt(prec) / model.qAt(prec), e, negate);
            em.mean = pf * s;
            em.precisionBits = prec;
        }
        out.push_back(em);
    }
    return out;
}

} // namespace

std::vector<ExactMean> expectedValueSweep(long r, const std::vector<long>& ns,
                                          const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("expectedValueSweep: r must be >= 1");
    return sweepImpl(r, ns, model, ctx, StatKind::value);
}

std::vector<ExactMean> expectedPositionSweep(long r, const std::vector<long>& ns,
                                             const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("expectedPositionSweep: r must be >= 1");
    return sweepImpl(r, ns, model, ctx, StatKind::leftCount);
}

} // namespace qr::exactmeans
