#include "qr/qkernel.hpp"

#include <cstdio>
#include <vector>

namespace qr {

std::string Real::str(int sig) const {
    if (sig < 1) sig = 1;
    char fmt[32];
    std::snprintf(fmt, sizeof(fmt), "%%.%dRg", sig);
    // mpfr_snprintf is locale-independent for numeric output
    int need = mpfr_snprintf(nullptr, 0, fmt, v_);
    std::string out(static_cast<size_t>(need) + 1, '\0');
    mpfr_snprintf(out.data(), out.size(), fmt, v_);
    out.resize(static_cast<size_t>(need));
    return out;
}

// ---------------------------------------------------------------------------
// model construction
// ---------------------------------------------------------------------------

static GeomModel buildModel(const mpq_class& qExact, const PrecisionContext& ctx) {
    if (!(qExact > 0 && qExact < 1)) throw std::invalid_argument("makeModel: q must lie in (0,1)");
    GeomModel m;
    m.bits = ctx.bits;
    m.qExact = qExact;
    m.qExact.canonicalize();
    m.q = Real(m.qExact, ctx.bits);
    m.p = 1 - m.q;
    m.Q = 1 / m.q;
    m.L = log(m.Q);
    return m;
}

GeomModel makeModel(const Real& q, const PrecisionContext& ctx) {
    ctx.validate();
    if (!q.isFinite()) throw std::invalid_argument("makeModel: non-finite q");
    if (!(q > Real(0L, 64) && q < Real(1L, 64))) throw std::invalid_argument("makeModel: q must lie in (0,1)");
    return buildModel(q.toRationalExact(), ctx);
}

GeomModel makeModel(const mpq_class& q, const PrecisionContext& ctx) {
    ctx.validate();
    return buildModel(q, ctx);
}

mpq_class parseQ(const std::string& qText) {
    if (qText.empty()) throw std::invalid_argument("parseQ: empty q");
    if (qText.find('/') != std::string::npos) {
        mpq_class r;
        if (r.set_str(qText, 10) != 0) throw std::invalid_argument("parseQ: bad ratio '" + qText + "'");
        r.canonicalize();
        if (!(r > 0 && r < 1)) throw std::invalid_argument("parseQ: q must lie in (0,1)");
        return r;
    }
    // decimal: parse sign/digits/point manually into an exact ratio
    size_t i = 0;
    if (qText[i] == '+') ++i;
    std::string digits;
    long fracDigits = 0;
    bool seenPoint = false, seenDigit = false;
    for (; i < qText.size(); ++i) {
        char c = qText[i];
        if (c == '.') {
            if (seenPoint) throw std::invalid_argument("parseQ: bad decimal '" + qText + "'");
            seenPoint = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            seenDigit = true;
            if (seenPoint) ++fracDigits;
        } else {
            throw std::invalid_argument("parseQ: bad decimal '" + qText + "'");
        }
    }
    if (!seenDigit) throw std::invalid_argument("parseQ: bad decimal '" + qText + "'");
    mpz_class num(digits.empty() ? "0" : digits);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(fracDigits));
    mpq_class r(num, den);
    r.canonicalize();
    if (!(r > 0 && r < 1)) throw std::invalid_argument("parseQ: q must lie in (0,1)");
    return r;
}

GeomModel makeModelFromString(const std::string& qText, const PrecisionContext& ctx) {
    ctx.validate();
    return buildModel(parseQ(qText), ctx);
}

// ---------------------------------------------------------------------------
// math constants
// ---------------------------------------------------------------------------

namespace {
// published digits used as a tripwire for library regressions
constexpr const char* kEulerDigits = "0.5772156649015328606065120900824024310422";
constexpr const char* kZetaDigits[] = {
    nullptr, nullptr,
    "1.644934066848226436472415166646025189219", // zeta(2)
    "1.202056903159594285399738161511449990765",
    "1.082323233711138191516003696541167902775",
    "1.036927755143369926331365486457034168057",
    "1.017343061984449139714517929790920527902", // zeta(6)
};

void checkDigits(const Real& got, const char* digits, const char* what) {
    Real ref(digits, 160);
    if (abs(got - ref).toDouble() > 1e-30)
        throw std::runtime_error(std::string("mathConstants: ") + what + " failed the published-digit check");
}
} // namespace

MathConstants mathConstants(const PrecisionContext& ctx, const std::set<unsigned long>& sSet) {
    ctx.validate();
    MathConstants mc;
    mc.gamma = Real::constEuler(ctx.bits);
    checkDigits(mc.gamma, kEulerDigits, "gamma");
    for (unsigned long s : sSet) {
        if (s < 2) throw std::invalid_argument("mathConstants: zeta(s) requires s >= 2");
        Real z = Real::zetaUi(s, ctx.bits);
        if (s <= 6) checkDigits(z, kZetaDigits[s], "zeta");
        mc.zetaValues.emplace(s, std::move(z));
    }
    return mc;
}

// ---------------------------------------------------------------------------
// q-Pochhammer
// ---------------------------------------------------------------------------

Real qPochhammerFinite(const Real& a, long n, const GeomModel& model) {
    if (n < 0) throw std::invalid_argument("qPochhammerFinite: n must be >= 0");
    long prec = std::max(a.prec(), model.bits);
    Real prod(1L, prec);
    Real aqi(prec);
    aqi = a;
    for (long i = 0; i < n; ++i) {
        prod *= (1 - aqi);
        aqi *= model.q;
    }
    return prod;
}

BoundedValue qPochhammerInfinite(const Real& a, const GeomModel& model, const PrecisionContext& ctx) {
    if (abs(a) >= model.Q) throw std::invalid_argument("qPochhammerInfinite: requires |a| < Q");
    long prec = std::max(a.prec(), ctx.bits);
    Real prod(1L, prec);
    Real aqi = a; // a q^i, starting at i = 0
    double q = model.q.toDouble();
    for (long i = 0;; ++i) {
        double aq = std::abs(aqi.toDouble());
        if (i > 0 && aq < 0.5) {
            // |log of the remaining product| <= sum_{j>=i} |a q^j|/(1-|a q^j|)
            double tailLog = aq / (1.0 - q) / (1.0 - aq);
            if (tailLog <= 0.125) {
                // |e^x - 1| <= 1.07 x on that range
                double errAbs = std::abs(prod.toDouble()) * tailLog * 1.1 + 1e-300;
                if (errAbs <= ctx.seriesTol) {
                    BoundedValue out;
                    out.estimate = prod;
                    out.errBound = errAbs;
                    return out;
                }
            }
        }
        if (i > 8'000'000) throw std::runtime_error("qPochhammerInfinite: series cut not reached");
        prod *= (1 - aqi);
        aqi *= model.q;
    }
}

// ---------------------------------------------------------------------------
// q-harmonic sums
// ---------------------------------------------------------------------------

std::pair<BoundedValue, BoundedValue> qHarmonicSums(const GeomModel& model, const PrecisionContext& ctx) {
    long prec = std::max(ctx.bits, model.bits);
    Real s1(prec), s2(prec);
    Real Ql(1L, prec);
    double q = model.q.toDouble();
    double p = 1.0 - q;
    long l = 0;
    for (;;) {
        ++l;
        Ql *= model.Q;
        Real d = Ql - 1;
        s1 += 1 / d;
        s2 += (Real(l, prec) * Ql) / (d * d);
        // past q^l <= 1/2 the terms obey 1/(Q^l-1) <= 2 q^l and l Q^l/(Q^l-1)^2 <= 2 l q^l
        double ql = std::pow(q, static_cast<double>(l));
        if (ql <= 0.5) {
            double tail1 = 2.0 * ql * q / p;
            double tail2 = 2.0 * q * ql * ((l + 1) * p + q) / (p * p);
            if (std::max(tail1, tail2) <= ctx.seriesTol) {
                BoundedValue b1, b2;
                b1.estimate = s1;
                b1.errBound = tail1;
                b2.estimate = s2;
                b2.errBound = tail2;
                return {b1, b2};
            }
        }
        if (l > 40'000'000) throw std::runtime_error("qHarmonicSums: series cut not reached");
    }
}

} // namespace qr
