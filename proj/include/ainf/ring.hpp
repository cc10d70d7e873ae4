#pragma once

// Exact scalar arithmetic over Q and over the truncated polynomial rings
// Q[h]/h^{N+1}. Every scalar carries its ring; mixing truncation orders is
// a hard error, never a silent coercion.

#include <gmpxx.h>

#include <string>
#include <vector>

#include "ainf/error.hpp"

namespace ainf {

using Rational = mpq_class;

/// Parse "p" or "p/q" into a canonical rational.
Rational parse_rational(const std::string& text);

/// Print as "p" or "p/q" (canonical form, q > 0 omitted when 1).
std::string rational_str(const Rational& r);

/// Ring descriptor: trunc < 0 means Q, trunc = N >= 0 means Q[h]/h^{N+1}.
struct Ring {
    int trunc = -1;

    static Ring q() { return Ring{-1}; }
    static Ring qh(int truncation_order) {
        if (truncation_order < 0) throw InputError("truncation order must be >= 0");
        return Ring{truncation_order};
    }

    bool is_q() const { return trunc < 0; }
    int coeff_count() const { return is_q() ? 1 : trunc + 1; }
    bool operator==(const Ring& o) const { return trunc == o.trunc; }
    bool operator!=(const Ring& o) const { return trunc != o.trunc; }
    std::string str() const;
};

/// A scalar in Q or Q[h]/h^{N+1}. Immutable value type; coefficient i is
/// the coefficient of h^i, and all arithmetic discards terms above h^N.
class Scalar {
public:
    Scalar() : ring_(Ring::q()), c_(1) {}
    Scalar(Ring ring, std::vector<Rational> coeffs);

    static Scalar zero(Ring ring);
    static Scalar one(Ring ring);
    /// Constant polynomial (or plain rational over Q).
    static Scalar constant(Ring ring, const Rational& value);
    /// The generator h. Error over Q; zero when N = 0 (h == 0 there).
    static Scalar h(Ring ring);
    /// h^k as a scalar of the given ring.
    static Scalar h_power(Ring ring, int k);

    const Ring& ring() const { return ring_; }
    int truncation_order() const { return ring_.trunc; }
    const std::vector<Rational>& coeffs() const { return c_; }
    const Rational& coeff(int i) const;

    bool is_zero() const;
    /// Units: nonzero over Q; over Q[h]/h^{N+1} exactly the scalars with
    /// nonzero constant term.
    bool is_unit() const;
    Scalar inverse() const;

    Scalar operator-() const;
    Scalar& operator+=(const Scalar& o);
    Scalar& operator-=(const Scalar& o);
    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(const Scalar& a, const Scalar& b);
    /// Division by a unit.
    friend Scalar operator/(const Scalar& a, const Scalar& b) { return a * b.inverse(); }
    bool operator==(const Scalar& o) const;
    bool operator!=(const Scalar& o) const { return !(*this == o); }
    bool operator<(const Scalar& o) const; // lexicographic; for ordered containers

    /// Multiply by h^k (truncating).
    Scalar shift_h(int k) const;
    /// Embed a Q scalar into a larger ring, or re-truncate to a smaller one.
    Scalar cast(Ring target) const;

    std::string str() const;

private:
    void check_same_ring(const Scalar& o) const;

    Ring ring_;
    std::vector<Rational> c_;
};

/// Coefficientwise convolution truncated at h^{N+1}.
/// Errors with "ring mismatch" when truncation orders differ.
Scalar hpoly_mul(const Scalar& a, const Scalar& b);

/// Formal derivative: sum i*a_i h^{i-1}, same truncation order.
Scalar d_dh(const Scalar& a);

/// Evaluation h -> c as an exact rational.
Rational specialize(const Scalar& a, const Rational& c);

} // namespace ainf
