#pragma once

// Dense truncated polynomials (power series mod x^{deg+1}) over an arbitrary
// coefficient ring.  Used with exact rationals for the identity checks and
// with multiprecision reals for the analytic extensions.
//
// The coefficient type must support +, -, *, / and copy construction.  A
// "zero prototype" travels with every polynomial so that types carrying
// runtime state (e.g. a working precision) propagate it into every
// accumulator.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qr {

template <class T>
class TruncPoly {
  public:
    TruncPoly(long deg, const T& zeroElem)
        : zero_(zeroElem), c_(static_cast<std::size_t>(deg + 1), zeroElem) {
        if (deg < 0) throw std::invalid_argument("TruncPoly: negative degree");
    }

    static TruncPoly constant(long deg, const T& zeroElem, const T& value) {
        TruncPoly p(deg, zeroElem);
        p.c_[0] = value;
        return p;
    }

    long deg() const { return static_cast<long>(c_.size()) - 1; }
    const T& operator[](long i) const { return c_[static_cast<std::size_t>(i)]; }
    T& operator[](long i) { return c_[static_cast<std::size_t>(i)]; }
    const T& zeroElem() const { return zero_; }

    TruncPoly& operator+=(const TruncPoly& o) {
        requireSameDeg(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = c_[i] + o.c_[i];
        return *this;
    }

    TruncPoly& operator-=(const TruncPoly& o) {
        requireSameDeg(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = c_[i] - o.c_[i];
        return *this;
    }

    TruncPoly operator+(const TruncPoly& o) const {
        TruncPoly r(*this);
        r += o;
        return r;
    }

    TruncPoly operator-(const TruncPoly& o) const {
        TruncPoly r(*this);
        r -= o;
        return r;
    }

    TruncPoly mul(const TruncPoly& o) const {
        requireSameDeg(o);
        TruncPoly out(deg(), zero_);
        const long d = deg();
        for (long i = 0; i <= d; ++i) {
            for (long j = 0; i + j <= d; ++j) {
                out.c_[static_cast<std::size_t>(i + j)] =
                    out.c_[static_cast<std::size_t>(i + j)] +
                    c_[static_cast<std::size_t>(i)] * o.c_[static_cast<std::size_t>(j)];
            }
        }
        return out;
    }

    TruncPoly scale(const T& s) const {
        TruncPoly out(*this);
        for (auto& v : out.c_) v = v * s;
        return out;
    }

    // Multiply in place by the linear factor (a + b*x).
    void mulLinearInPlace(const T& a, const T& b) {
        const long d = deg();
        for (long i = d; i >= 0; --i) {
            T v = c_[static_cast<std::size_t>(i)] * a;
            if (i > 0) v = v + c_[static_cast<std::size_t>(i - 1)] * b;
            c_[static_cast<std::size_t>(i)] = v;
        }
    }

    // Multiplicative inverse mod x^{deg+1}; requires an invertible constant
    // term.  Newton iteration is overkill at these degrees, so this is the
    // plain triangular solve.
    TruncPoly recip() const {
        TruncPoly out(deg(), zero_);
        const T one = zero_ + 1;
        out.c_[0] = one / c_[0];
        const long d = deg();
        for (long k = 1; k <= d; ++k) {
            T s = zero_;
            for (long i = 1; i <= k; ++i) {
                s = s + c_[static_cast<std::size_t>(i)] * out.c_[static_cast<std::size_t>(k - i)];
            }
            out.c_[static_cast<std::size_t>(k)] = (zero_ - s) / c_[0];
        }
        return out;
    }

  private:
    void requireSameDeg(const TruncPoly& o) const {
        if (o.deg() != deg()) throw std::invalid_argument("TruncPoly: degree mismatch");
    }

    T zero_;
    std::vector<T> c_;
};

} // namespace qr
