#pragma once

// Exact-rational helpers shared by the identity oracles and enumeration.

#include <gmpxx.h>

#include <stdexcept>

namespace qr {

using Rat = mpq_class;

inline mpz_class binomial(unsigned long n, unsigned long k) {
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

// base^e with integer e (negative allowed; base must be nonzero then).
inline Rat ratPow(const Rat& base, long e) {
    if (e == 0) return Rat(1);
    const unsigned long a = static_cast<unsigned long>(e > 0 ? e : -e);
    mpz_class rn, rd;
    mpz_pow_ui(rn.get_mpz_t(), base.get_num().get_mpz_t(), a);
    mpz_pow_ui(rd.get_mpz_t(), base.get_den().get_mpz_t(), a);
    if (e < 0) {
        if (rn == 0) throw std::invalid_argument("ratPow: zero base with negative exponent");
        std::swap(rn, rd);
    }
    Rat r(rn, rd);
    r.canonicalize();
    return r;
}

} // namespace qr
