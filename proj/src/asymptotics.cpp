#include "qr/asymptotics.hpp"

#include "qr/truncpoly.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qr::asymptotics {

namespace {

using RPoly = TruncPoly<Real>;

constexpr long kMaxSeriesTerms = 50'000'000;
constexpr long kMaxProductTerms = 3'000'000;

// Rounding slack for error bounds: a few ulps at the working precision,
// floored so the bound never degenerates to zero.
double roundSlack(long prec, double magnitude) {
    const int sh = static_cast<int>(std::min<long>(prec > 24 ? prec - 16 : 8, 1000));
    double s = std::ldexp(1.0 + std::fabs(magnitude), -sh);
    if (s < 1e-300) s = 1e-300;
    return s;
}

// Number of q-power terms needed to push the truncated tail below the
// working precision (plus margin).
long seriesLengthFor(long prec, double qd, long extra) {
    const double lnq = std::log(qd);
    if (!(lnq < 0)) throw std::domain_error("series length: q must lie in (0,1)");
    const double len = (static_cast<double>(prec) * 0.6931471805599453 + 64.0) / (-lnq);
    long lm = static_cast<long>(std::ceil(len)) + extra;
    if (lm < extra) lm = extra;
    if (lm > kMaxProductTerms)
        throw std::domain_error("series length: q too close to 1 for the truncation budget");
    return lm;
}

// The termwise-merged j-th element of the published three-sum sigma display.
Real sigmaPaperTerm(long r, long j, const Real& q, const Real& p) {
    const Real qj = powi(q, j);
    const Real om = 1 - qj;
    const Real om1 = 1 - qj * q;
    const Real pr1 = powi(p, r - 1);
    const Real t1 = -pr1 * powi(q, (j - 1) * (r - 1)) / powi(om, r);
    const Real t2 = -p * qj / (om * om);
    const Real t3 = pr1 * powi(q, j * (r - 1)) / (om * om * powi(om1, r - 2));
    return t1 + t2 + t3;
}

} // namespace

// ---------------------------------------------------------------------------
// ValueAsymptote
// ---------------------------------------------------------------------------

Real ValueAsymptote::prediction(long n) const {
    if (n < 1) throw std::invalid_argument("ValueAsymptote::prediction: n must be >= 1");
    const long prec = sigma.estimate.prec();
    const Real q = model.qAt(prec);
    const Real L = -log(q);
    return log(Real(n, prec)) / L + sigma.estimate;
}

// ---------------------------------------------------------------------------
// sigma and friends
// ---------------------------------------------------------------------------

BoundedValue sigma(long r, const GeomModel& model, const PrecisionContext& ctx,
                   const MathConstants& constants) {
    if (r < 1) throw std::invalid_argument("sigma: r must be >= 1");
    const long prec = ctx.bits;
    const Real q = model.qAt(prec);
    const Real p = 1 - q;
    const Real L = -log(q);
    Real est = constants.gamma / L + Real(1, prec) / 2;
    double tail = 0.0;
    if (r >= 2) {
        const Real qOverP = q / p;
        Real series(0, prec);
        Real qjm1(1, prec); // q^{j-1}
        Real qj = q;        // q^j
        bool converged = false;
        for (long j = 1; j <= kMaxSeriesTerms; ++j) {
            const Real om = 1 - qj;
            const Real y = p * qjm1 / om;
            Real powAcc = y;
            Real bSum = y;
            for (long b = 2; b <= r - 1; ++b) {
                powAcc *= y;
                bSum += powAcc;
            }
            const Real term = bSum / om;
            series += term;
            const Real tailBound = term * qOverP;
            if (tailBound.toDouble() <= ctx.seriesTol) {
                tail = tailBound.toDouble();
                converged = true;
                break;
            }
            qjm1 = qj;
            qj *= q;
        }
        if (!converged) throw std::runtime_error("sigma: series did not reach the tail tolerance");
        est -= series;
    }
    return BoundedValue{est, tail + roundSlack(prec, est.toDouble())};
}

Real sigmaPaperTermJ(long r, long j, const GeomModel& model) {
    if (r < 1) throw std::invalid_argument("sigmaPaperTermJ: r must be >= 1");
    if (j < 1) throw std::invalid_argument("sigmaPaperTermJ: j must be >= 1");
    return sigmaPaperTerm(r, j, model.q, model.p);
}

BoundedValue sigmaPaperForm(long r, const GeomModel& model, const PrecisionContext& ctx,
                            const MathConstants& constants) {
    if (r < 1) throw std::invalid_argument("sigmaPaperForm: r must be >= 1");
    const long prec = ctx.bits;
    const Real q = model.qAt(prec);
    const Real p = 1 - q;
    const Real L = -log(q);
    Real est = constants.gamma / L + Real(1, prec) / 2;
    double tail = 0.0;
    if (r >= 2) {
        // The merged term decays at least geometrically (ratio q), so the tail
        // after j is bounded by the current absolute term times q/p.
        const Real qOverP = q / p;
        Real series(0, prec);
        bool converged = false;
        for (long j = 1; j <= kMaxSeriesTerms; ++j) {
            const Real term = sigmaPaperTerm(r, j, q, p);
            series += term;
            const Real tailBound = abs(term) * qOverP;
            if (tailBound.toDouble() <= ctx.seriesTol) {
                tail = tailBound.toDouble();
                converged = true;
                break;
            }
        }
        if (!converged)
            throw std::runtime_error("sigmaPaperForm: series did not reach the tail tolerance");
        est += series;
    }
    return BoundedValue{est, tail + roundSlack(prec, est.toDouble())};
}

// ---------------------------------------------------------------------------
// beta and friends
// ---------------------------------------------------------------------------

BoundedValue beta(long r, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 2) throw std::domain_error("beta: defined for r >= 2 only");
    const long prec = ctx.bits;
    const Real q = model.qAt(prec);
    const Real p = 1 - q;
    const Real L = -log(q);
    const Real qOverP = q / p;
    std::vector<Real> qpPow(static_cast<std::size_t>(r - 1), Real(1, prec));
    for (std::size_t i = 1; i < qpPow.size(); ++i) qpPow[i] = qpPow[i - 1] * qOverP;
    Real series(0, prec);
    Real qj = q;
    double tail = 0.0;
    bool converged = false;
    for (long j = 1; j <= kMaxSeriesTerms; ++j) {
        const Real om = 1 - qj;
        const Real w = qj / om;
        Real powAcc = w;
        Real term = qpPow[static_cast<std::size_t>(r - 2)] * w;
        for (long b = 2; b <= r - 1; ++b) {
            powAcc *= w;
            term += qpPow[static_cast<std::size_t>(r - 1 - b)] * powAcc;
        }
        term /= om;
        series += term;
        const Real tailBound = term * qOverP * L;
        if (tailBound.toDouble() <= ctx.seriesTol) {
            tail = tailBound.toDouble();
            converged = true;
            break;
        }
        qj *= q;
    }
    if (!converged) throw std::runtime_error("beta: series did not reach the tail tolerance");
    Real est = L * series;
    if (r % 2 == 1) est = -est;
    return BoundedValue{est, tail + roundSlack(prec, est.toDouble())};
}

BoundedValue betaPaperForm(long r, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 2) throw std::domain_error("betaPaperForm: defined for r >= 2 only");
    const long prec = ctx.bits;
    const Real q = model.qAt(prec);
    const Real p = 1 - q;
    const Real L = -log(q);
    const Real qOverP = q / p;
    const Real qpR2 = powi(qOverP, r - 2);
    Real series(0, prec);
    Real qj = q;
    double tail = 0.0;
    bool converged = false;
    for (long j = 1; j <= kMaxSeriesTerms; ++j) {
        const Real om = 1 - qj;
        const Real qj1 = qj * q;
        const Real s1 = powi(q, j * (r - 1)) / powi(om, r);
        const Real base = qj / (om * om);
        const Real s2 = base * (qpR2 - powi(qj1 / (1 - qj1), r - 2));
        series += s1 + q * s2;
        // majorant: replace the bracket by its upper bound (q/p)^{r-2}
        const Real tailBound = (s1 + q * base * qpR2) * qOverP * L;
        if (tailBound.toDouble() <= ctx.seriesTol) {
            tail = tailBound.toDouble();
            converged = true;
            break;
        }
        qj = qj1;
    }
    if (!converged)
        throw std::runtime_error("betaPaperForm: series did not reach the tail tolerance");
    Real est = L * series;
    if (r % 2 == 1) est = -est;
    return BoundedValue{est, tail + roundSlack(prec, est.toDouble())};
}

// ---------------------------------------------------------------------------
// Value-kernel analytic extension
// ---------------------------------------------------------------------------

Real phiExtensionAtZ(long r, const Real& z, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("phiExtensionAtZ: r must be >= 1");
    const long prec = std::max(z.prec(), ctx.bits);
    const long deg = r - 1;
    const Real q = model.qAt(prec);
    const long ninf = seriesLengthFor(prec, q.toDouble(), r + 4);
    const Real zero(0, prec);
    const Real one(1, prec);

    RPoly P1 = RPoly::constant(deg, zero, one); // ((1-x)q;q)_inf
    RPoly P2 = RPoly::constant(deg, zero, one); // ((1-x)q^2;q)_inf
    Real qq = one;                              // (q;q)_inf
    Real qi = q;
    for (long i = 1; i <= ninf; ++i) {
        P1.mulLinearInPlace(1 - qi, qi);
        if (i >= 2) P2.mulLinearInPlace(1 - qi, qi);
        qq *= (1 - qi);
        qi *= q;
    }
    RPoly G(deg, zero);
    G[0] = P1[0] / qq;
    for (long i = 1; i <= deg; ++i) G[i] = (P1[i] - q * P2[i - 1]) / qq;

    Real num = one;                          // (q^{z+1};q)_inf
    RPoly dden = RPoly::constant(deg, zero, one); // ((1-x)q^{z+1};q)_inf
    Real qzi = pow(q, z + 1);
    for (long i = 1; i <= ninf; ++i) {
        num *= (1 - qzi);
        dden.mulLinearInPlace(1 - qzi, qzi);
        qzi *= q;
    }
    const RPoly d = dden.recip().scale(num);
    return G.mul(d)[deg];
}

// ---------------------------------------------------------------------------
// psi at special points
// ---------------------------------------------------------------------------

BoundedValue psi2At1(const GeomModel& model, const PrecisionContext& ctx) {
    const auto sums = qHarmonicSums(model, ctx);
    const long prec = ctx.bits;
    const Real q = model.qAt(prec);
    const Real p = 1 - q;
    const Real L = -log(q);
    const Real cA = p / (q * L);
    const Real cB = p / q;
    const Real rhs = -cA * sums.first.estimate + cB * sums.second.estimate
                   + 1 / L - 1 / p - q / p;
    const Real qp2 = (q / p) * (q / p);
    const Real est = -qp2 * rhs;
    const double err = qp2.toDouble() * (std::fabs(cA.toDouble()) * sums.first.errBound
                                         + cB.toDouble() * sums.second.errBound)
                     + roundSlack(prec, est.toDouble());
    return BoundedValue{est, err};
}

Real psiExtension(long r, const Real& z, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("psiExtension: r must be >= 1");
    if (r > 3) throw std::domain_error("psiExtension: r >= 4 not supported");
    const long prec = std::max(z.prec(), ctx.bits);
    const Real q = model.qAt(prec);
    const Real p = 1 - q;

    // tau(z, m) = u b1 + v b2 with z-dependent u, v precomputed once:
    //   b1 = -X q/p^2 + X lin/p + q^2/p^2,  b2 = X q/p^2 - X lin/p - q/p^2,
    // where X = q^{m+1} and lin = z - m - 1.
    const Real qzm1 = pow(q, z - 1);
    const Real qz = qzm1 * q;
    const Real u = qzm1 / (1 - qzm1);
    const Real v = qz / (1 - qz);
    const Real cQ2P2 = q * q / (p * p);
    const Real cQP2 = q / (p * p);
    auto tauZ = [&](const Real& X, const Real& lin) -> Real {
        const Real a = X * cQP2;
        const Real b = X * lin / p;
        return u * (cQ2P2 + b - a) + v * (a - b - cQP2);
    };

    if (r == 1) return tauZ(qz, z - 1); // tau(z, 0): X = q^{0+1}, lin = z - 1

    const long lm = seriesLengthFor(prec, q.toDouble(), r + 8);

    // First sum: l from r-1, integer kernel arguments.
    Real s1(0, prec);
    {
        Real g1(0, prec);                 // g_1(l) for r = 3
        Real ql = powi(q, r - 1);         // q^l
        Real X = ql * q;                  // q^{l+1}
        Real qlm1 = powi(q, r - 2);       // q^{l-1}
        for (long l = r - 1; l < lm; ++l) {
            if (r == 3 && l > 1) g1 += qlm1 / (1 - qlm1);
            const Real g = (r == 2) ? Real(1, prec) : g1;
            s1 += g * tauZ(X, z - (l + 1)) * (ql / (1 - ql));
            qlm1 = ql;
            ql = X;
            X *= q;
        }
    }

    // Second sum: shifted arguments m = l + z - 1.
    // For r = 3, g_1(l + z - 1) = H - T[l] with
    //   H = sum_{i>=1} q^i/(1-q^i),  T[l] = sum_{j>=l} q^{j+z-1}/(1-q^{j+z-1}).
    std::vector<Real> T;
    Real H(0, prec);
    if (r == 3) {
        T.assign(static_cast<std::size_t>(lm + 1), Real(0, prec));
        Real w = qzm1 * powi(q, lm - 1); // q^{lm-1+z-1}
        for (long l = lm - 1; l >= 0; --l) {
            T[static_cast<std::size_t>(l)] = T[static_cast<std::size_t>(l + 1)] + w / (1 - w);
            w /= q;
        }
        Real qi = q;
        for (long i = 1; i < lm; ++i) {
            H += qi / (1 - qi);
            qi *= q;
        }
    }
    Real s2(0, prec);
    {
        Real qm = qzm1; // q^{l+z-1}
        Real X = qz;    // q^{m+1} = q^{l+z}
        for (long l = 0; l < lm; ++l) {
            const Real g = (r == 2) ? Real(1, prec) : H - T[static_cast<std::size_t>(l)];
            s2 += g * tauZ(X, Real(-l, prec)) * (qm / (1 - qm));
            qm = X;
            X *= q;
        }
    }
    return s1 - s2;
}

BoundedValue psiAtNumeric(long r, long z0, const GeomModel& model, const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("psiAtNumeric: r must be >= 1");
    if (r > 3)
        throw std::domain_error("psiAtNumeric: r >= 4 not supported (chain-sum extension unavailable)");
    if (z0 != 0 && z0 != 1) throw std::invalid_argument("psiAtNumeric: z0 must be 0 or 1");
    const long prec = ctx.bits;
    const Real z(z0, prec);
    const Real e1 = Real(1, prec) / 1000;
    const Real e2 = Real(1, prec) / 10000;
    auto symAvg = [&](const Real& eps) {
        return (psiExtension(r, z + eps, model, ctx) + psiExtension(r, z - eps, model, ctx)) / 2;
    };
    const Real a1 = symAvg(e1);
    const Real a2 = symAvg(e2);
    const Real e1s = e1 * e1;
    const Real e2s = e2 * e2;
    const Real est = (a2 * e1s - a1 * e2s) / (e1s - e2s);
    const double resid = abs(a2 - a1).toDouble();
    return BoundedValue{est, resid + 1e-18 * (1.0 + std::fabs(est.toDouble()))};
}

PositionAsymptote positionLeadingCoeff(long r, const GeomModel& model,
                                       const PrecisionContext& ctx) {
    if (r < 1) throw std::invalid_argument("positionLeadingCoeff: r must be >= 1");
    if (r > 3) throw std::domain_error("positionLeadingCoeff: r > 3 not supported");
    const long prec = ctx.bits;
    const Real q = model.qAt(prec);
    const Real p = 1 - q;
    BoundedValue slope{Real(0, prec), 0.0};
    if (r == 1) {
        const Real L = -log(q);
        slope.estimate = 1 / L - q / p;
        slope.errBound = roundSlack(prec, slope.estimate.toDouble());
    } else {
        const Real scale = powi(p / q, r);
        BoundedValue psi1 = (r == 2) ? psi2At1(model, ctx) : psiAtNumeric(3, 1, model, ctx);
        Real est = scale * psi1.estimate;
        if (r % 2 == 0) est = -est; // (-1)^{r-1}
        slope.estimate = est;
        slope.errBound = scale.toDouble() * psi1.errBound
                       + roundSlack(prec, est.toDouble());
    }
    const double s = slope.estimate.toDouble();
    if (!(s > 0.0 && s < 1.0))
        throw std::runtime_error("positionLeadingCoeff: slope left the open unit interval");
    return PositionAsymptote{r, slope, model};
}

// ---------------------------------------------------------------------------
// q -> 1 limits
// ---------------------------------------------------------------------------

Real mellinReference(double t, MellinKind which) {
    if (!(t > 0.0 && t <= 0.2))
        throw std::domain_error("mellinReference: t must lie in (0, 0.2]");
    const long prec = 192;
    const Real tt(t, prec);
    const Real gamma = Real::constEuler(prec);
    const Real lnt = log(tt);
    if (which == MellinKind::invQl)
        return (gamma - lnt) / tt + Real(1, prec) / 4;
    return (gamma + 1 - lnt) / (tt * tt);
}

Real sigmaZetaLimit(long r, const MathConstants& constants) {
    if (r < 4) throw std::domain_error("sigmaZetaLimit: defined for r >= 4 only");
    const long prec = constants.zeta(2).prec();
    Real out = constants.zeta(2) * (r - 1);
    for (long k = 3; k <= r - 3; ++k)
        out += constants.zeta(static_cast<unsigned long>(k)) * (r - 1 - k);
    out += constants.zeta(static_cast<unsigned long>(r - 2));
    out -= constants.zeta(static_cast<unsigned long>(r));
    out -= Real(r * (r - 3), prec) / 2;
    return out;
}

PermConstants permutationConstants(long r, std::optional<long> n) {
    if (r < 1) throw std::invalid_argument("permutationConstants: r must be >= 1");
    if (r > 512) throw std::invalid_argument("permutationConstants: r unreasonably large");
    mpz_class twoR;
    mpz_ui_pow_ui(twoR.get_mpz_t(), 2, static_cast<unsigned long>(r));
    PermConstants out;
    out.lambda = Rat(mpz_class(1), twoR);
    out.mu = Rat(1) - out.lambda;
    if (n) {
        if (*n < 1) throw std::invalid_argument("permutationConstants: n must be >= 1");
        out.predictedPositionPlusOne = Rat(*n + 1) * out.lambda;
    }
    return out;
}

} // namespace qr::asymptotics
