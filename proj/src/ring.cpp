#include "ainf/ring.hpp"

#include <sstream>

namespace ainf {

Rational parse_rational(const std::string& text) {
    if (text.empty()) throw InputError("empty rational literal");
    std::size_t pos = 0;
    if (text[0] == '+' || text[0] == '-') pos = 1;
    bool seen_digit = false, seen_slash = false;
    for (std::size_t i = pos; i < text.size(); ++i) {
        char ch = text[i];
        if (ch == '/') {
            if (seen_slash || !seen_digit) throw InputError("bad rational literal: " + text);
            seen_slash = true;
            seen_digit = false;
        } else if (ch >= '0' && ch <= '9') {
            seen_digit = true;
        } else {
            throw InputError("bad rational literal: " + text);
        }
    }
    if (!seen_digit) throw InputError("bad rational literal: " + text);
    Rational r(text);
    if (r.get_den() == 0) throw InputError("zero denominator: " + text);
    r.canonicalize();
    return r;
}

std::string rational_str(const Rational& r) {
    return r.get_str();
}

std::string Ring::str() const {
    if (is_q()) return "Q";
    std::ostringstream os;
    os << "Q[h]/h^" << trunc + 1;
    return os.str();
}

Scalar::Scalar(Ring ring, std::vector<Rational> coeffs) : ring_(ring), c_(std::move(coeffs)) {
    if ((int)c_.size() != ring_.coeff_count())
        throw InputError("scalar coefficient count does not match ring " + ring_.str());
}

Scalar Scalar::zero(Ring ring) {
    return Scalar(ring, std::vector<Rational>(ring.coeff_count()));
}

Scalar Scalar::one(Ring ring) {
    return constant(ring, 1);
}

Scalar Scalar::constant(Ring ring, const Rational& value) {
    std::vector<Rational> c(ring.coeff_count());
    c[0] = value;
    return Scalar(ring, std::move(c));
}

Scalar Scalar::h(Ring ring) {
    return h_power(ring, 1);
}

Scalar Scalar::h_power(Ring ring, int k) {
    if (ring.is_q()) throw InputError("h does not live in Q");
    std::vector<Rational> c(ring.coeff_count());
    if (k <= ring.trunc) c[k] = 1;
    return Scalar(ring, std::move(c));
}

const Rational& Scalar::coeff(int i) const {
    static const Rational zero_rat(0);
    if (i < 0 || i >= (int)c_.size()) return zero_rat;
    return c_[i];
}

bool Scalar::is_zero() const {
    for (const auto& x : c_)
        if (x != 0) return false;
    return true;
}

bool Scalar::is_unit() const {
    return c_[0] != 0;
}

Scalar Scalar::inverse() const {
    if (!is_unit()) throw InputError("scalar is not a unit in " + ring_.str());
    if (ring_.is_q()) return constant(ring_, Rational(1) / c_[0]);
    // Power series inversion: b_0 = 1/a_0, b_k = -(1/a_0) sum_{j=1..k} a_j b_{k-j}.
    std::vector<Rational> b(c_.size());
    Rational inv0 = Rational(1) / c_[0];
    b[0] = inv0;
    for (std::size_t k = 1; k < c_.size(); ++k) {
        Rational acc(0);
        for (std::size_t j = 1; j <= k; ++j) acc += c_[j] * b[k - j];
        b[k] = -inv0 * acc;
    }
    return Scalar(ring_, std::move(b));
}

void Scalar::check_same_ring(const Scalar& o) const {
    if (ring_ != o.ring_)
        throw InputError("ring mismatch: " + ring_.str() + " vs " + o.ring_.str());
}

Scalar Scalar::operator-() const {
    Scalar r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

Scalar& Scalar::operator+=(const Scalar& o) {
    check_same_ring(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
    check_same_ring(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

Scalar operator*(const Scalar& a, const Scalar& b) {
    a.check_same_ring(b);
    std::vector<Rational> c(a.c_.size());
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
        if (a.c_[i] == 0) continue;
        for (std::size_t j = 0; i + j < c.size(); ++j) {
            if (b.c_[j] == 0) continue;
            c[i + j] += a.c_[i] * b.c_[j];
        }
    }
    return Scalar(a.ring_, std::move(c));
}

bool Scalar::operator==(const Scalar& o) const {
    check_same_ring(o);
    return c_ == o.c_;
}

bool Scalar::operator<(const Scalar& o) const {
    check_same_ring(o);
    for (std::size_t i = 0; i < c_.size(); ++i) {
        int c = cmp(c_[i], o.c_[i]);
        if (c != 0) return c < 0;
    }
    return false;
}

Scalar Scalar::shift_h(int k) const {
    if (ring_.is_q()) throw InputError("h does not live in Q");
    std::vector<Rational> c(c_.size());
    for (std::size_t i = 0; i + k < c_.size(); ++i) c[i + k] = c_[i];
    return Scalar(ring_, std::move(c));
}

Scalar Scalar::cast(Ring target) const {
    std::vector<Rational> c(target.coeff_count());
    for (std::size_t i = 0; i < c.size() && i < c_.size(); ++i) c[i] = c_[i];
    // Casting down must not silently drop data when the source is genuinely
    // wider: only constants may cross into Q.
    if (target.coeff_count() < (int)c_.size()) {
        for (std::size_t i = target.coeff_count(); i < c_.size(); ++i)
            if (c_[i] != 0) throw InputError("cast would truncate nonzero h-terms");
    }
    return Scalar(target, std::move(c));
}

std::string Scalar::str() const {
    if (ring_.is_q()) return rational_str(c_[0]);
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (i) os << ", ";
        os << rational_str(c_[i]);
    }
    os << "]";
    return os.str();
}

Scalar hpoly_mul(const Scalar& a, const Scalar& b) {
    return a * b;
}

Scalar d_dh(const Scalar& a) {
    std::vector<Rational> c(a.coeffs().size());
    for (std::size_t i = 1; i < a.coeffs().size(); ++i)
        c[i - 1] = Rational((long)i) * a.coeffs()[i];
    return Scalar(a.ring(), std::move(c));
}

Rational specialize(const Scalar& a, const Rational& c) {
    // Horner evaluation.
    Rational acc(0);
    for (auto it = a.coeffs().rbegin(); it != a.coeffs().rend(); ++it)
        acc = acc * c + *it;
    return acc;
}

} // namespace ainf
