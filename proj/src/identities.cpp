#include "qr/identities.hpp"

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qr::identities {

namespace {

// q^e for integer e (negative allowed).
Rat qp(const Rat& q, long e) { return ratPow(q, e); }

// sum_{h>=1} q^{h d} = q^d / (1-q^d), d >= 1.
Rat geomSum(const Rat& q, long d) {
    if (d < 1) throw std::invalid_argument("geomSum: exponent must be >= 1");
    const Rat qd = qp(q, d);
    return qd / (1 - qd);
}

// sum_{h>=1} h q^{h d} = q^d / (1-q^d)^2, d >= 1.
Rat geomSumLinear(const Rat& q, long d) {
    if (d < 1) throw std::invalid_argument("geomSumLinear: exponent must be >= 1");
    const Rat qd = qp(q, d);
    const Rat om = 1 - qd;
    return qd / (om * om);
}

// prod_{i=lo}^{hi} (1 - (1-x) q^i) truncated at degree deg.
XPoly shiftedPochRange(const Rat& q, long lo, long hi, long deg) {
    XPoly out = XPoly::constant(deg, Rat(0), Rat(1));
    Rat qi = qp(q, lo);
    for (long i = lo; i <= hi; ++i) {
        out.mulLinearInPlace(1 - qi, qi);
        qi *= q;
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Finite products
// ---------------------------------------------------------------------------

Rat pochhammerRat(const Rat& a, const Rat& q, long n) {
    if (n < 0) throw std::invalid_argument("pochhammerRat: n must be >= 0");
    Rat out(1);
    Rat aqi = a;
    for (long i = 0; i < n; ++i) {
        out *= (1 - aqi);
        aqi *= q;
    }
    return out;
}

XPoly shiftedPochhammerPoly(const Rat& q, long n, long deg) {
    if (n < 0) throw std::invalid_argument("shiftedPochhammerPoly: n must be >= 0");
    return shiftedPochRange(q, 1, n, deg);
}

// ---------------------------------------------------------------------------
// Helper-sum identity
// ---------------------------------------------------------------------------

Rat extractHelperCoefficient(long n, long m, const Rat& q) {
    if (m < 0 || n < m) throw std::invalid_argument("extractHelperCoefficient: need 0 <= m <= n");
    // Expand 1/(1-wq^{h-1}) = sum_a w^a q^{a(h-1)} and h w q^h (w q^h)^m /(1-wq^h)
    // = sum_b h w^{1+m+b} q^{h(1+m+b)}.  The w^n constraint forces
    // a + b = n - m - 1 and the h-sum collapses to sum_h h q^{hn}.
    const long D = n - m - 1;
    if (D < 0) return Rat(0);
    Rat inner(0);
    for (long a = 0; a <= D; ++a) inner += qp(q, -a);
    return inner * geomSumLinear(q, n);
}

Rat helperClosedForm(long n, long m, const Rat& q) {
    if (m < 0 || n < m) throw std::invalid_argument("helperClosedForm: need 0 <= m <= n");
    if (n == 0) return Rat(0);
    const Rat p = 1 - q;
    const Rat om = 1 - qp(q, n);
    return (q / p) * (qp(q, m) - qp(q, n)) / (om * om);
}

// ---------------------------------------------------------------------------
// tau
// ---------------------------------------------------------------------------

Rat extractTauCoefficient(long k, long m, const Rat& q) {
    if (m < 0 || k - m - 2 < 0)
        throw std::invalid_argument("extractTauCoefficient: need 0 <= m <= k-2");
    // [w^k] of sum_{h>=1} (wq^h)^{m+1} w (1-q^{h-1}) / ((1-wq^{h-1})^2 (1-wq^h)):
    // 1/(1-wq^{h-1})^2 = sum_a (a+1) w^a q^{a(h-1)},  1/(1-wq^h) = sum_b w^b q^{bh};
    // w-degree m+2+a+b = k forces a+b = k-m-2, the q-exponent collapses to
    // h(k-1) - a, and (1-q^{h-1}) splits the h-sum into two geometric pieces.
    const long D = k - m - 2;
    Rat inner(0);
    for (long a = 0; a <= D; ++a) inner += (a + 1) * qp(q, -a);
    return inner * (geomSum(q, k - 1) - geomSum(q, k) / q);
}

Rat tauClosedForm(long k, long m, const Rat& q) {
    const Rat p = 1 - q;
    const Rat p2 = p * p;
    const Rat u = geomSum(q, k - 1); // 1/(Q^{k-1}-1)
    const Rat v = geomSum(q, k);     // 1/(Q^k-1)
    const Rat qm1 = qp(q, m + 1);
    const Rat qm2 = qm1 * q;
    const Rat lin = Rat(k - m - 1);
    const Rat b1 = -qm2 / p2 + qm1 * lin / p + q * q / p2;
    const Rat b2 = qm2 / p2 - qm1 * lin / p - q / p2;
    return u * b1 + v * b2;
}

Rat tauClosedFormUngrouped(long k, long m, const Rat& q) {
    const Rat p = 1 - q;
    const Rat p2 = p * p;
    const Rat omk1 = 1 - qp(q, k - 1);
    const Rat omk = 1 - qp(q, k);
    const Rat u = geomSum(q, k - 1);
    const Rat v = geomSum(q, k);
    const Rat qm1 = qp(q, m + 1);
    const Rat qm2 = qm1 * q;
    const Rat lin = Rat(k - m - 1);
    return -qm2 / p2 / omk1 + qm1 * lin / p / omk1 + q * q / p2 * u
         + qm2 / p2 / omk - qm1 * lin / p / omk - q * q / p2 * v;
}

// ---------------------------------------------------------------------------
// Chain sums and phi
// ---------------------------------------------------------------------------

Rat chainSumDirect(long s, long j, const Rat& q) {
    if (s < 0) throw std::invalid_argument("chainSumDirect: s must be >= 0");
    if (s == 0) return Rat(1);
    if (j <= s) return Rat(0);
    // F(t, l): chains of length t with all elements in {1, ..., l-1};
    // recurrence on whether l-1 is the largest element.
    std::vector<Rat> prev(static_cast<std::size_t>(j + 1), Rat(1)); // t = 0
    std::vector<Rat> cur(static_cast<std::size_t>(j + 1), Rat(0));
    for (long t = 1; t <= s; ++t) {
        cur.assign(static_cast<std::size_t>(j + 1), Rat(0));
        for (long l = 1; l <= j; ++l) {
            Rat v = cur[static_cast<std::size_t>(l - 1)];
            if (l - 1 >= 1) v += prev[static_cast<std::size_t>(l - 1)] * geomSum(q, l - 1);
            cur[static_cast<std::size_t>(l)] = v;
        }
        prev = cur;
    }
    return prev[static_cast<std::size_t>(j)];
}

Rat chainSumXForm(long s, long j, const Rat& q) {
    if (s < 0) throw std::invalid_argument("chainSumXForm: s must be >= 0");
    if (j < 1) return s == 0 ? Rat(1) : Rat(0);
    const XPoly num = shiftedPochhammerPoly(q, j - 1, s);
    const Rat den = pochhammerRat(q, q, j - 1);
    return num[s] / den;
}

Rat phiDirect(long r, long k, const Rat& q) {
    if (r < 1) throw std::invalid_argument("phiDirect: r must be >= 1");
    if (k < r) return Rat(0);
    const Rat qk = qp(q, k);
    if (r == 1) return 1 - qk;
    Rat total(0);
    for (long l = r - 1; l <= k - 1; ++l) {
        total += chainSumDirect(r - 2, l, q) * geomSum(q, l) * (qp(q, l) - qk);
    }
    return total;
}

Rat phiXForm(long r, long k, const Rat& q) {
    if (r < 1) throw std::invalid_argument("phiXForm: r must be >= 1");
    if (k < r) return Rat(0);
    const long deg = r - 1;
    const XPoly A = shiftedPochRange(q, 1, k, deg);       // ((1-x)q;q)_k
    const XPoly B = shiftedPochRange(q, 2, k, deg);       // ((1-x)q^2;q)_{k-1}
    const Rat ck = pochhammerRat(q, q, k);
    const Rat cpk = pochhammerRat(q, q, k - 1);
    Rat t = (qp(q, k) - 1) * A[deg] / ck;
    if (deg >= 1) t += q * B[deg - 1] / cpk;
    return -t;
}

Rat extractValueInnerSum(long r, long k, const Rat& q) {
    if (r < 1) throw std::invalid_argument("extractValueInnerSum: r must be >= 1");
    if (k < r) return Rat(0);
    // [w^k] of the nested sum over 1 <= h < i_1 < ... < i_{r-1}: expand every
    // factor as a geometric series in w, giving a composition
    // a + b + c_1 + ... + c_{r-1} = k - r, then resolve the chain sums
    // innermost-out.  Each chain variable i_t carries effective exponent
    // e_t = (1+c_t) + e_{t+1}; summing it out yields the single factor
    // q^{e_t} / (1-q^{e_t}) plus a carry q^{e_t * (next outer variable)}.
    // The final h-sum always collapses to sum_h h q^{hk} = q^k/(1-q^k)^2.
    const long total = k - r;
    const Rat hPart = geomSumLinear(q, k);
    Rat acc(0);
    std::vector<long> c(static_cast<std::size_t>(r - 1), 0);
    // Enumerate (a, b, c_1..c_{r-1}) summing to `total`.
    std::function<void(long, long)> rec = [&](long idx, long remaining) {
        if (idx == r - 1) {
            // remaining = a + b; sum over a of q^{-a} with b determined.
            Rat fold(1);
            long carry = 0;
            for (long t = r - 2; t >= 0; --t) {
                const long e = 1 + c[static_cast<std::size_t>(t)] + carry;
                fold *= geomSum(q, e);
                carry = e;
            }
            Rat aSum(0);
            for (long a = 0; a <= remaining; ++a) aSum += qp(q, -a);
            acc += aSum * fold;
            return;
        }
        for (long v = 0; v <= remaining; ++v) {
            c[static_cast<std::size_t>(idx)] = v;
            rec(idx + 1, remaining - v);
        }
    };
    rec(0, total);
    return acc * hPart;
}

std::pair<Rat, Rat> phiFormsCheck(long r, long k, const Rat& q) {
    return {phiDirect(r, k, q), phiXForm(r, k, q)};
}

// ---------------------------------------------------------------------------
// Small-n exact mean for r = 1
// ---------------------------------------------------------------------------

Rat firstRecordValueMeanRat(long n, const Rat& q) {
    if (n < 1) throw std::invalid_argument("firstRecordValueMeanRat: n must be >= 1");
    Rat s(0);
    mpz_class bin;
    for (long k = 1; k <= n; ++k) {
        mpz_bin_uiui(bin.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
        const Rat term = Rat(bin) / (1 - ratPow(q, k));
        if (k % 2 == 1) s += term;
        else s -= term;
    }
    return s;
}

} // namespace qr::identities
