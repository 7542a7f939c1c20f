#pragma once

// Precision-managed arithmetic: an RAII wrapper over MPFR reals, the
// geometric-model parameter bundle, q-Pochhammer symbols and the two
// q-harmonic series, all with rigorous tail bounds.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace qr {

// ---------------------------------------------------------------------------
// Precision context
// ---------------------------------------------------------------------------

struct PrecisionContext {
    long bits = 256;          // working mantissa bits
    double seriesTol = 1e-40; // absolute tail-bound target for infinite series

    void validate() const {
        if (bits < 64) throw std::invalid_argument("PrecisionContext: bits must be >= 64");
        if (!(seriesTol > 0)) throw std::invalid_argument("PrecisionContext: seriesTol must be > 0");
        // seriesTol >= 2^(-bits+8); for very large bits the RHS underflows to 0
        // and any positive tolerance qualifies.
        const double floor = std::ldexp(1.0, static_cast<int>(std::max(-1020L, -bits + 8)));
        if (bits - 8 < 1020 && seriesTol < floor)
            throw std::invalid_argument("PrecisionContext: seriesTol below 2^(-bits+8)");
    }
};

// ---------------------------------------------------------------------------
// Real: arbitrary-precision real (MPFR), value-semantic, deterministic.
// Binary operations round to the wider operand's precision; compound
// assignment keeps the target's precision, so accumulators behave.
// ---------------------------------------------------------------------------

class Real {
  public:
    explicit Real(long prec = 64) {
        mpfr_init2(v_, clampPrec(prec));
        mpfr_set_zero(v_, 1);
    }
    Real(long value, long prec) {
        mpfr_init2(v_, clampPrec(prec));
        mpfr_set_si(v_, value, MPFR_RNDN);
    }
    Real(int value, long prec) : Real(static_cast<long>(value), prec) {}
    Real(double value, long prec) {
        mpfr_init2(v_, clampPrec(prec));
        mpfr_set_d(v_, value, MPFR_RNDN);
    }
    Real(const std::string& decimal, long prec) {
        mpfr_init2(v_, clampPrec(prec));
        if (mpfr_set_str(v_, decimal.c_str(), 10, MPFR_RNDN) != 0)
            throw std::invalid_argument("Real: unparseable literal '" + decimal + "'");
    }
    Real(const mpq_class& ratio, long prec) {
        mpfr_init2(v_, clampPrec(prec));
        mpfr_set_q(v_, ratio.get_mpq_t(), MPFR_RNDN);
    }
    Real(const mpz_class& z, long prec) {
        mpfr_init2(v_, clampPrec(prec));
        mpfr_set_z(v_, z.get_mpz_t(), MPFR_RNDN);
    }

    Real(const Real& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Real(Real&& o) noexcept {
        mpfr_init2(v_, 64);
        mpfr_swap(v_, o.v_);
    }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    long prec() const { return mpfr_get_prec(v_); }
    mpfr_srcptr raw() const { return v_; }
    mpfr_ptr raw() { return v_; }

    bool isFinite() const { return mpfr_number_p(v_) != 0; }
    bool isZero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    double toDouble() const { return mpfr_get_d(v_, MPFR_RNDN); }
    mpq_class toRationalExact() const {
        if (!isFinite()) throw std::invalid_argument("Real: non-finite has no rational value");
        mpq_class out;
        mpfr_get_q(out.get_mpq_t(), v_);
        return out;
    }

    // Value printed with `sig` significant digits, C locale, '.' separator.
    std::string str(int sig = 15) const;

    // -- arithmetic ---------------------------------------------------------
#define QR_REAL_BINOP(op, fn)                                        \
    friend Real operator op(const Real& a, const Real& b) {          \
        Real r(std::max(a.prec(), b.prec()));                        \
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);                             \
        return r;                                                    \
    }                                                                \
    Real& operator op##=(const Real & b) {                           \
        fn(v_, v_, b.v_, MPFR_RNDN);                                 \
        return *this;                                                \
    }
    QR_REAL_BINOP(+, mpfr_add)
    QR_REAL_BINOP(-, mpfr_sub)
    QR_REAL_BINOP(*, mpfr_mul)
    QR_REAL_BINOP(/, mpfr_div)
#undef QR_REAL_BINOP

    friend Real operator-(const Real& a) {
        Real r(a.prec());
        mpfr_neg(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator*(const Real& a, long b) {
        Real r(a.prec());
        mpfr_mul_si(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator*(long a, const Real& b) { return b * a; }
    friend Real operator/(const Real& a, long b) {
        Real r(a.prec());
        mpfr_div_si(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator/(long a, const Real& b) {
        Real r(b.prec());
        mpfr_si_div(r.v_, a, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator+(const Real& a, long b) {
        Real r(a.prec());
        mpfr_add_si(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator-(const Real& a, long b) {
        Real r(a.prec());
        mpfr_sub_si(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    friend Real operator-(long a, const Real& b) {
        Real r(b.prec());
        mpfr_si_sub(r.v_, a, b.v_, MPFR_RNDN);
        return r;
    }

    friend bool operator==(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) == 0; }
    friend bool operator!=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) != 0; }
    friend bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }

    // -- elementary functions (result at argument precision) -----------------
    friend Real abs(const Real& a) {
        Real r(a.prec());
        mpfr_abs(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend Real log(const Real& a) {
        Real r(a.prec());
        mpfr_log(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend Real exp(const Real& a) {
        Real r(a.prec());
        mpfr_exp(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend Real sqrt(const Real& a) {
        Real r(a.prec());
        mpfr_sqrt(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend Real powi(const Real& a, long e) {
        Real r(a.prec());
        mpfr_pow_si(r.v_, a.v_, e, MPFR_RNDN);
        return r;
    }
    friend Real pow(const Real& a, const Real& e) {
        Real r(std::max(a.prec(), e.prec()));
        mpfr_pow(r.v_, a.v_, e.v_, MPFR_RNDN);
        return r;
    }

    // log2 of |x| rounded up; 0 maps to a very negative sentinel.
    long exponentCeil() const {
        if (mpfr_zero_p(v_)) return -1'000'000'000L;
        return static_cast<long>(mpfr_get_exp(v_));
    }

    static Real constEuler(long prec) {
        Real r(prec);
        mpfr_const_euler(r.v_, MPFR_RNDN);
        return r;
    }
    static Real constLog2(long prec) {
        Real r(prec);
        mpfr_const_log2(r.v_, MPFR_RNDN);
        return r;
    }
    static Real zetaUi(unsigned long s, long prec) {
        Real r(prec);
        mpfr_zeta_ui(r.v_, s, MPFR_RNDN);
        return r;
    }

  private:
    static long clampPrec(long p) { return p < MPFR_PREC_MIN ? MPFR_PREC_MIN : p; }
    mpfr_t v_;
};

// ---------------------------------------------------------------------------
// BoundedValue: estimate plus a rigorous absolute error bound.
// ---------------------------------------------------------------------------

struct BoundedValue {
    Real estimate{64};
    double errBound = 0.0;

    bool contains(const Real& truth) const { return abs(truth - estimate).toDouble() <= errBound; }
};

// ---------------------------------------------------------------------------
// GeomModel: p, q, Q = 1/q, L = ln Q, plus the exact rational form of q so
// that derived computations can rebuild q at any working precision.
// ---------------------------------------------------------------------------

struct GeomModel {
    Real q{64}, p{64}, Q{64}, L{64};
    mpq_class qExact;
    long bits = 0;

    Real qAt(long prec) const { return Real(qExact, prec); }
    Real pAt(long prec) const { return Real(mpq_class(1) - qExact, prec); }
};

GeomModel makeModel(const Real& q, const PrecisionContext& ctx);
GeomModel makeModel(const mpq_class& q, const PrecisionContext& ctx);
// Accepts a decimal ("0.99") or an exact ratio ("1/2"); both retain the exact
// rational form.
GeomModel makeModelFromString(const std::string& qText, const PrecisionContext& ctx);
mpq_class parseQ(const std::string& qText);

// ---------------------------------------------------------------------------
// Math constants
// ---------------------------------------------------------------------------

struct MathConstants {
    Real gamma{64};
    std::map<unsigned long, Real> zetaValues;

    const Real& zeta(unsigned long s) const {
        auto it = zetaValues.find(s);
        if (it == zetaValues.end()) throw std::invalid_argument("MathConstants: zeta(s) not populated");
        return it->second;
    }
};

// gamma and zeta(s) for s in sSet, computed at ctx.bits and cross-checked
// against 30+ published digits; throws if a library value drifts.
MathConstants mathConstants(const PrecisionContext& ctx, const std::set<unsigned long>& sSet);

// ---------------------------------------------------------------------------
// q-Pochhammer and q-harmonic series
// ---------------------------------------------------------------------------

// (a;q)_n = (1-a)(1-aq)...(1-aq^{n-1}); n = 0 gives 1.
Real qPochhammerFinite(const Real& a, long n, const GeomModel& model);

// (a;q)_infinity with a truncation bound <= ctx.seriesTol; requires |a| < Q.
BoundedValue qPochhammerInfinite(const Real& a, const GeomModel& model, const PrecisionContext& ctx);

// (sum_{l>=1} 1/(Q^l-1), sum_{l>=1} l Q^l/(Q^l-1)^2), tails <= ctx.seriesTol.
std::pair<BoundedValue, BoundedValue> qHarmonicSums(const GeomModel& model, const PrecisionContext& ctx);

} // namespace qr
