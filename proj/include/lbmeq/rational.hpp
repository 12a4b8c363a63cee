#pragma once

#include <gmpxx.h>

#include <cctype>
#include <complex>
#include <ostream>
#include <string>
#include <string_view>

#include "lbmeq/errors.hpp"

namespace lbmeq {

/// Arbitrary-precision rational, always kept canonical (reduced, positive
/// denominator).
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

/// Parses "p", "-p", "p/q", "+p/q". Whitespace is not allowed inside the
/// literal. Throws std::invalid_argument on malformed text or zero denominator.
inline Rational parse_rational(std::string_view text) {
    auto digits = [](std::string_view s) {
        if (s.empty()) return false;
        for (char c : s)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    };
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    const auto slash = body.find('/');
    std::string_view num = body.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
    if (!digits(num) || !digits(den))
        throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    mpz_class n(std::string(num), 10);
    mpz_class d(std::string(den), 10);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational r(negative ? mpz_class(-n) : n, d);
    r.canonicalize();
    return r;
}

/// "p/q", or "p" for integers.
inline std::string to_string(const Rational& r) { return r.get_str(); }

/// LaTeX form: "\frac{p}{q}" with the sign pulled in front.
inline std::string to_latex(const Rational& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    std::string sign = r < 0 ? "-" : "";
    mpz_class num = abs(r.get_num());
    return sign + "\\frac{" + num.get_str() + "}{" + r.get_den().get_str() + "}";
}

inline double to_double(const Rational& r) { return r.get_d(); }

/// Gaussian rational re + i·im.
struct ComplexRational {
    Rational re;
    Rational im;

    ComplexRational() = default;
    ComplexRational(Rational real) : re(std::move(real)) {}  // NOLINT: implicit promotion is intended
    ComplexRational(long real) : re(real) {}                  // NOLINT
    ComplexRational(Rational real, Rational imag) : re(std::move(real)), im(std::move(imag)) {}

    static ComplexRational i() { return {Rational(0), Rational(1)}; }

    bool is_zero() const { return re == 0 && im == 0; }
    ComplexRational conj() const { return {re, Rational(-im)}; }
    Rational norm2() const { return Rational(re * re + im * im); }

    ComplexRational& operator+=(const ComplexRational& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    ComplexRational& operator-=(const ComplexRational& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    ComplexRational& operator*=(const ComplexRational& o) {
        Rational r = re * o.re - im * o.im;
        Rational j = re * o.im + im * o.re;
        re = std::move(r);
        im = std::move(j);
        return *this;
    }
    ComplexRational& operator/=(const ComplexRational& o) {
        const Rational n = o.norm2();
        if (n == 0) throw std::domain_error("division by zero Gaussian rational");
        *this *= o.conj();
        re /= n;
        im /= n;
        return *this;
    }

    friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) { return a += b; }
    friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) { return a -= b; }
    friend ComplexRational operator*(ComplexRational a, const ComplexRational& b) { return a *= b; }
    friend ComplexRational operator/(ComplexRational a, const ComplexRational& b) { return a /= b; }
    friend ComplexRational operator-(const ComplexRational& a) { return {Rational(-a.re), Rational(-a.im)}; }
    friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const ComplexRational& a, const ComplexRational& b) { return !(a == b); }

    std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }
};

inline std::string to_string(const ComplexRational& z) {
    if (z.im == 0) return to_string(z.re);
    std::string out = z.re == 0 ? "" : to_string(z.re) + (z.im < 0 ? "-" : "+");
    if (z.re == 0 && z.im < 0) out += "-";
    Rational m = abs(z.im);
    if (m != 1) out += to_string(m);
    return out + "i";
}

inline std::ostream& operator<<(std::ostream& os, const ComplexRational& z) { return os << to_string(z); }

/// i^n for n ≥ 0.
inline ComplexRational i_power(unsigned n) {
    switch (n % 4) {
        case 0: return {Rational(1), Rational(0)};
        case 1: return {Rational(0), Rational(1)};
        case 2: return {Rational(-1), Rational(0)};
        default: return {Rational(0), Rational(-1)};
    }
}

namespace detail {
inline bool is_zero(const Rational& r) { return r == 0; }
inline bool is_zero(const ComplexRational& z) { return z.is_zero(); }
inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const std::complex<double>& z) { return z == std::complex<double>(0.0, 0.0); }
}  // namespace detail

}  // namespace lbmeq
