#pragma once

#include <array>
#include <complex>
#include <vector>

#include "lbmeq/diffpoly.hpp"
#include "lbmeq/matrix.hpp"
#include "lbmeq/scheme.hpp"

namespace lbmeq {

/// Matrix of differential operators.
using OpMatrix = Matrix<DiffPoly>;

inline OpMatrix op_zero(std::size_t rows, std::size_t cols, int dim, int cap = kDefaultDegreeCap) {
    return OpMatrix(rows, cols, DiffPoly(dim, cap));
}

inline OpMatrix op_identity(std::size_t n, int dim, int cap = kDefaultDegreeCap) {
    return OpMatrix::identity(n, DiffPoly::constant(dim, Rational(1), cap), DiffPoly(dim, cap));
}

/// Lifts a rational matrix to degree-0 operators.
inline OpMatrix to_op(const RationalMatrix& m, int dim, int cap = kDefaultDegreeCap) {
    return m.map([&](const Rational& r) { return DiffPoly::constant(dim, r, cap); });
}

inline OpMatrix op_diagonal(const std::vector<Rational>& d, int dim, int cap = kDefaultDegreeCap) {
    return to_op(diagonal(d), dim, cap);
}

inline bool op_truncated(const OpMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j).truncated()) return true;
    return false;
}

/// Every entry homogeneous of degree j.
inline bool op_homogeneous(const OpMatrix& m, int j) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (!m(i, c).is_homogeneous(j)) return false;
    return true;
}

inline bool op_is_zero(const OpMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!m(i, j).is_zero()) return false;
    return true;
}

/// Λ = M diag(Σ_α λ v̂_j^α ∂_α) M⁻¹.
inline OpMatrix build_lambda(const LatticeScheme& s, int cap = kDefaultDegreeCap) {
    require_valid(s);
    const RationalMatrix minv = inverse_moment_matrix(s);
    const auto q = static_cast<std::size_t>(s.q);
    OpMatrix out = op_zero(q, q, s.d, cap);
    for (int a = 0; a < s.d; ++a) {
        std::vector<Rational> va;
        for (const auto& v : s.velocities) va.emplace_back(s.lambda * v[static_cast<std::size_t>(a)]);
        const RationalMatrix La = s.M * diagonal(va) * minv;
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < q; ++j)
                if (La(i, j) != 0) out(i, j).add_term(MultiIndex::unit(a), La(i, j));
    }
    return out;
}

struct Blocks {
    OpMatrix A, B, C, D;
};

inline Blocks block_split(const OpMatrix& m, int n_c) {
    const auto q = m.rows();
    if (m.cols() != q) throw ValidationError("block_split: operator matrix is not square");
    if (n_c < 1 || static_cast<std::size_t>(n_c) >= q) throw ValidationError("block_split: conserved count out of range");
    const auto nc = static_cast<std::size_t>(n_c);
    const auto ny = q - nc;
    return {m.block(0, 0, nc, nc), m.block(0, nc, nc, ny), m.block(nc, 0, ny, nc), m.block(nc, nc, ny, ny)};
}

inline OpMatrix block_join(const Blocks& b) {
    const auto nc = b.A.rows();
    const auto q = nc + b.D.rows();
    OpMatrix out(q, q);
    out.set_block(0, 0, b.A);
    out.set_block(0, nc, b.B);
    out.set_block(nc, 0, b.C);
    out.set_block(nc, nc, b.D);
    return out;
}

/// Blocks of Λ, Λ², Λ³, Λ⁴; level[n-1] holds the blocks of Λⁿ.
struct BlockPowers {
    std::vector<Blocks> level;

    const Blocks& operator[](int n) const { return level.at(static_cast<std::size_t>(n - 1)); }
    int depth() const { return static_cast<int>(level.size()); }
};

/// Builds levels by the recurrence Λⁿ⁺¹ = Λⁿ Λ written blockwise:
/// A_{n+1} = A_n A + B_n C, B_{n+1} = A_n B + B_n D,
/// C_{n+1} = C_n A + D_n C, D_{n+1} = C_n B + D_n D.
inline BlockPowers block_powers(const OpMatrix& lambda, int n_c, int up_to = 4) {
    if (up_to < 1) throw ValidationError("block_powers: level must be at least 1");
    BlockPowers bp;
    bp.level.push_back(block_split(lambda, n_c));
    const Blocks b1 = bp.level.front();
    for (int n = 2; n <= up_to; ++n) {
        const Blocks prev = bp.level.back();
        Blocks next;
        next.A = prev.A * b1.A + prev.B * b1.C;
        next.B = prev.A * b1.B + prev.B * b1.D;
        next.C = prev.C * b1.A + prev.D * b1.C;
        next.D = prev.C * b1.B + prev.D * b1.D;
        bp.level.push_back(std::move(next));
    }
    return bp;
}

/// Substitutes ∂_α → i k_α in every entry, exact.
inline ComplexRationalMatrix apply_planewave(const OpMatrix& op, const std::vector<ComplexRational>& k) {
    std::vector<ComplexRational> ik;
    for (const auto& x : k) ik.push_back(ComplexRational::i() * x);
    return op.map([&](const DiffPoly& p) {
        ComplexRational acc;
        for (const auto& [beta, c] : p.terms()) {
            ComplexRational t(c);
            for (std::size_t a = 0; a < ik.size(); ++a)
                for (int e = 0; e < beta.e[a]; ++e) t *= ik[a];
            acc += t;
        }
        return acc;
    });
}

/// Floating version of apply_planewave for real wavevectors.
inline Matrix<std::complex<double>> apply_planewave(const OpMatrix& op, const std::vector<double>& k) {
    return op.map([&](const DiffPoly& p) {
        std::complex<double> acc = 0;
        for (const auto& [beta, c] : p.terms()) {
            std::complex<double> t = to_double(c);
            for (std::size_t a = 0; a < k.size(); ++a)
                for (int e = 0; e < beta.e[a]; ++e) t *= std::complex<double>(0.0, k[a]);
            acc += t;
        }
        return acc;
    });
}

}  // namespace lbmeq
