#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbmeq/rational.hpp"

namespace lbmeq {

inline constexpr int kMaxDim = 3;
inline constexpr int kDefaultDegreeCap = 4;

/// Exponent vector β ∈ ℕ^d; unused trailing slots stay zero.
struct MultiIndex {
    std::array<std::uint8_t, kMaxDim> e{};

    static MultiIndex unit(int axis) {
        MultiIndex m;
        m.e.at(static_cast<std::size_t>(axis)) = 1;
        return m;
    }

    static MultiIndex from(const std::vector<int>& v) {
        if (v.size() > kMaxDim) throw std::invalid_argument("multi-index longer than supported dimension");
        MultiIndex m;
        for (std::size_t a = 0; a < v.size(); ++a) {
            if (v[a] < 0 || v[a] > 255) throw std::invalid_argument("multi-index entry out of range");
            m.e[a] = static_cast<std::uint8_t>(v[a]);
        }
        return m;
    }

    int degree() const {
        int s = 0;
        for (auto x : e) s += x;
        return s;
    }

    std::vector<int> to_vector(int dim) const { return {e.begin(), e.begin() + dim}; }

    friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
        MultiIndex m;
        for (std::size_t k = 0; k < kMaxDim; ++k) m.e[k] = static_cast<std::uint8_t>(a.e[k] + b.e[k]);
        return m;
    }
    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.e == b.e; }
    friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return a.e != b.e; }
};

/// Graded lexicographic order: lower total degree first; within a degree the
/// exponent of ∂₁ decreases, then ∂₂, ... (so ∂x² < ∂x∂y < ∂y²).
struct GradedLex {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        const int da = a.degree();
        const int db = b.degree();
        if (da != db) return da < db;
        return a.e > b.e;
    }
};

/// Every multi-index of dimension `dim` with total degree exactly `degree`,
/// in graded-lex order.
inline std::vector<MultiIndex> monomials_of_degree(int dim, int degree) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<std::size_t>(dim), 0);
    auto rec = [&](auto&& self, int axis, int left) -> void {
        if (axis == dim - 1) {
            cur[static_cast<std::size_t>(axis)] = left;
            out.push_back(MultiIndex::from(cur));
            return;
        }
        for (int k = left; k >= 0; --k) {
            cur[static_cast<std::size_t>(axis)] = k;
            self(self, axis + 1, left - k);
        }
    };
    if (dim > 0) rec(rec, 0, degree);
    return out;
}

/// Sparse commutative polynomial in d variables with a hard degree cap.
///
/// With rational coefficients it models a constant-coefficient differential
/// operator Σ c_β ∂^β; with Gaussian-rational coefficients it models a
/// truncated series in the wavevector k. Zero coefficients are never stored.
/// A default-constructed polynomial is the zero of unspecified dimension and
/// adopts the dimension of whatever it is combined with.
///
/// Products whose terms exceed the cap drop those terms and set `truncated()`.
template <class Coeff>
class Poly {
public:
    using Terms = std::map<MultiIndex, Coeff, GradedLex>;

    Poly() = default;
    explicit Poly(int dim, int cap = kDefaultDegreeCap) : dim_(dim), cap_(cap) { check_dim(); }

    /// Constant polynomial (degree-0 term). Implicit so scalars promote in
    /// matrix code.
    Poly(const Coeff& c) {  // NOLINT
        if (!detail::is_zero(c)) terms_.emplace(MultiIndex{}, c);
    }
    Poly(long c) : Poly(Coeff(c)) {}  // NOLINT

    static Poly constant(int dim, const Coeff& c, int cap = kDefaultDegreeCap) {
        Poly p(dim, cap);
        p.add_term(MultiIndex{}, c);
        return p;
    }

    static Poly monomial(int dim, const MultiIndex& beta, const Coeff& c, int cap = kDefaultDegreeCap) {
        Poly p(dim, cap);
        p.add_term(beta, c);
        return p;
    }

    /// ∂_axis (or k_axis).
    static Poly variable(int dim, int axis, int cap = kDefaultDegreeCap) {
        return monomial(dim, MultiIndex::unit(axis), Coeff(1), cap);
    }

    int dim() const noexcept { return dim_; }
    int cap() const noexcept { return cap_; }
    bool truncated() const noexcept { return truncated_; }
    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }

    /// Highest total degree present, -1 for the zero polynomial.
    int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

    /// Lowest total degree present, -1 for the zero polynomial.
    int min_degree() const { return terms_.empty() ? -1 : terms_.begin()->first.degree(); }

    /// True when every term has total degree exactly `j` (vacuously for zero).
    bool is_homogeneous(int j) const {
        return std::all_of(terms_.begin(), terms_.end(), [j](const auto& t) { return t.first.degree() == j; });
    }

    Coeff coefficient(const MultiIndex& beta) const {
        auto it = terms_.find(beta);
        return it == terms_.end() ? Coeff(0) : it->second;
    }

    /// Terms of total degree exactly `j`.
    Poly homogeneous_part(int j) const {
        Poly out = empty_like();
        for (const auto& [beta, c] : terms_)
            if (beta.degree() == j) out.terms_.emplace(beta, c);
        return out;
    }

    void add_term(const MultiIndex& beta, const Coeff& c) {
        if (beta.degree() > cap_) {
            if (!detail::is_zero(c)) truncated_ = true;
            return;
        }
        for (int a = std::max(dim_, 0); a < kMaxDim; ++a)
            if (beta.e[static_cast<std::size_t>(a)] != 0) throw std::invalid_argument("multi-index exceeds dimension");
        auto [it, inserted] = terms_.emplace(beta, c);
        if (!inserted) it->second += c;
        if (detail::is_zero(it->second)) terms_.erase(it);
    }

    /// Drops the truncation flag, e.g. after a deliberate series truncation.
    void clear_truncated() noexcept { truncated_ = false; }

    Poly& operator+=(const Poly& o) {
        adopt(o);
        truncated_ = truncated_ || o.truncated_;
        for (const auto& [beta, c] : o.terms_) add_term(beta, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        adopt(o);
        truncated_ = truncated_ || o.truncated_;
        for (const auto& [beta, c] : o.terms_) add_term(beta, Coeff(-c));
        return *this;
    }
    Poly& operator*=(const Poly& o) {
        *this = *this * o;
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator-(const Poly& a) {
        Poly out = a.empty_like();
        out.truncated_ = a.truncated_;
        for (const auto& [beta, c] : a.terms_) out.terms_.emplace(beta, Coeff(-c));
        return out;
    }

    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly out = a.empty_like();
        out.adopt(b);
        out.truncated_ = a.truncated_ || b.truncated_;
        if (a.terms_.empty() || b.terms_.empty()) return out;
        for (const auto& [ba, ca] : a.terms_)
            for (const auto& [bb, cb] : b.terms_) out.add_term(ba + bb, Coeff(ca * cb));
        return out;
    }

    Poly scaled(const Coeff& s) const {
        Poly out = empty_like();
        out.truncated_ = truncated_;
        if (detail::is_zero(s)) return out;
        for (const auto& [beta, c] : terms_) out.terms_.emplace(beta, Coeff(c * s));
        return out;
    }

    /// Value at a point: Σ c_β Π x_a^{β_a}.
    template <class X>
    X evaluate(const std::vector<X>& point) const {
        X acc(0);
        for (const auto& [beta, c] : terms_) {
            X term = X(c);
            for (int a = 0; a < dim_; ++a)
                for (int p = 0; p < beta.e[static_cast<std::size_t>(a)]; ++p) term = term * point[static_cast<std::size_t>(a)];
            acc = acc + term;
        }
        return acc;
    }

    /// Coefficient-wise map into another coefficient ring.
    template <class F>
    auto map_coefficients(F&& f) const -> Poly<decltype(f(std::declval<const MultiIndex&>(), std::declval<const Coeff&>()))> {
        using Out = decltype(f(std::declval<const MultiIndex&>(), std::declval<const Coeff&>()));
        Poly<Out> out;
        out.dim_ = dim_;
        out.cap_ = cap_;
        for (const auto& [beta, c] : terms_) out.add_term(beta, f(beta, c));
        if (truncated_) out.mark_truncated();
        return out;
    }

    void mark_truncated() noexcept { truncated_ = true; }

    /// Terms and dimension agree; the cap and flag are bookkeeping only.
    friend bool operator==(const Poly& a, const Poly& b) {
        if (a.terms_ != b.terms_) return false;
        return a.terms_.empty() || a.dim_ <= 0 || b.dim_ <= 0 || a.dim_ == b.dim_;
    }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

private:
    template <class>
    friend class Poly;

    Poly empty_like() const {
        Poly p;
        p.dim_ = dim_;
        p.cap_ = cap_;
        return p;
    }

    void adopt(const Poly& o) {
        if (dim_ <= 0) {
            dim_ = o.dim_;
        } else if (o.dim_ > 0 && o.dim_ != dim_) {
            throw std::invalid_argument("polynomials of different dimension");
        }
        cap_ = std::min(cap_, o.cap_);
    }

    void check_dim() const {
        if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("dimension must be in 1.." + std::to_string(kMaxDim));
    }

    int dim_ = 0;
    int cap_ = kDefaultDegreeCap;
    bool truncated_ = false;
    Terms terms_;
};

/// Constant-coefficient differential operator Σ c_β ∂^β.
using DiffPoly = Poly<Rational>;

/// Truncated multivariate series in k with Gaussian-rational coefficients.
using KSeries = Poly<ComplexRational>;

/// Substitutes ∂_α → i k_α.
inline KSeries to_wave_series(const DiffPoly& p) {
    return p.map_coefficients([](const MultiIndex& beta, const Rational& c) {
        return i_power(static_cast<unsigned>(beta.degree())) * ComplexRational(c);
    });
}

namespace detail {
inline bool is_zero(const DiffPoly& p) { return p.is_zero(); }
inline bool is_zero(const KSeries& p) { return p.is_zero(); }
}  // namespace detail

}  // namespace lbmeq
