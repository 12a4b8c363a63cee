#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "lbmeq/opmatrix.hpp"
#include "lbmeq/scheme.hpp"

namespace lbmeq {

inline constexpr int kMaxOrder = 4;

/// Diagonal of Σ = S⁻¹ − ½ I.
struct HenonMatrix {
    std::vector<Rational> sigma;

    explicit HenonMatrix(const LatticeScheme& s) : sigma(henon_diagonal(s)) {}

    OpMatrix op(int dim, int cap = kDefaultDegreeCap) const { return op_diagonal(sigma, dim, cap); }
};

/// Γ_1..Γ_order (n_c×n_c) and Ψ_1..Ψ_min(order,3) ((q−n_c)×n_c).
struct ExpansionResult {
    int order = 0;
    int dim = 1;
    std::vector<OpMatrix> gamma;  // gamma[j-1] = Γ_j
    std::vector<OpMatrix> psi;    // psi[j-1] = Ψ_j

    const OpMatrix& Gamma(int j) const { return gamma.at(static_cast<std::size_t>(j - 1)); }
    const OpMatrix& Psi(int j) const { return psi.at(static_cast<std::size_t>(j - 1)); }
};

/// Computes the operators of the fourth-order recursive expansion at the
/// scheme's frozen linearization: every derivative term d(X).Y becomes the
/// operator product X·Y and Φ becomes E.
///
/// Throws ValidationError for order outside 1..4 and TruncationError when the
/// degree cap is too small to hold Γ_order.
inline ExpansionResult expand(const LatticeScheme& s, int order, int cap = kDefaultDegreeCap) {
    if (order < 1 || order > kMaxOrder) throw ValidationError("order must be between 1 and " + std::to_string(kMaxOrder));
    if (cap < order)
        throw TruncationError("degree cap " + std::to_string(cap) + " is below requested order " + std::to_string(order));
    require_valid(s);

    const int d = s.d;
    const OpMatrix lambda = build_lambda(s, cap);
    const BlockPowers bp = block_powers(lambda, s.n_c, std::min(order, 2));
    const OpMatrix& A = bp[1].A;
    const OpMatrix& B = bp[1].B;
    const OpMatrix& C = bp[1].C;
    const OpMatrix& D = bp[1].D;
    const OpMatrix E = to_op(s.E, d, cap);
    const OpMatrix Sg = HenonMatrix(s).op(d, cap);
    const Rational sixth(1, 6), twelfth(1, 12), quarter(1, 4);

    ExpansionResult r;
    r.order = order;
    r.dim = d;
    r.gamma.reserve(kMaxOrder);
    r.psi.reserve(kMaxOrder);

    const OpMatrix G1 = A + B * E;
    r.gamma.push_back(G1);
    r.psi.push_back(E * G1 - (C + D * E));
    const OpMatrix& P1 = r.psi[0];
    if (order >= 2) {
        const OpMatrix G2 = B * Sg * P1;
        r.gamma.push_back(G2);
        r.psi.push_back(Sg * P1 * G1 + E * G2 - D * Sg * P1);
    }
    if (order >= 3) {
        const OpMatrix& B2 = bp[2].B;
        const OpMatrix& D2 = bp[2].D;
        const OpMatrix& G2 = r.gamma[1];
        const OpMatrix& P2 = r.psi[1];
        const OpMatrix G3 = B * Sg * P2 - (B * P1 * G1).scaled(sixth) + (B2 * P1).scaled(twelfth);
        r.gamma.push_back(G3);
        r.psi.push_back(Sg * P1 * G2 + E * G3 - D * Sg * P2 + Sg * P2 * G1 + (D * P1 * G1).scaled(sixth) -
                        (D2 * P1).scaled(twelfth) - (P1 * G1 * G1).scaled(twelfth));
    }
    if (order >= 4) {
        const OpMatrix& B2 = bp[2].B;
        const OpMatrix& D2 = bp[2].D;
        const OpMatrix& G2 = r.gamma[1];
        const OpMatrix& P2 = r.psi[1];
        const OpMatrix& P3 = r.psi[2];
        OpMatrix G4 = B * Sg * P3;
        G4 += (B2 * P2).scaled(quarter);
        G4 += (B * D2 * Sg * P1).scaled(sixth);
        G4 -= (A * B * P2).scaled(sixth);
        G4 -= (B * E * G1 * G2).scaled(sixth);
        G4 -= (B * E * G2 * G1).scaled(sixth);
        G4 -= (B * Sg * P1 * G1 * G1).scaled(sixth);
        r.gamma.push_back(G4);
    }
    // Ψ_j is only needed up to order-1, but Ψ_order (j ≤ 3) is cheap and
    // reported for completeness.
    r.psi.resize(static_cast<std::size_t>(std::min(order, 3)));

    for (const auto& g : r.gamma)
        if (op_truncated(g)) throw TruncationError("degree cap " + std::to_string(cap) + " truncated the expansion");
    for (const auto& p : r.psi)
        if (op_truncated(p)) throw TruncationError("degree cap " + std::to_string(cap) + " truncated the expansion");
    return r;
}

// ---------------------------------------------------------------------------
// Equivalent PDE

/// One term c·Δt^dt_order·∂^β W_variable on the right-hand side of
/// ∂t W_equation = −Σ_j Δt^{j−1} Γ_j W.
struct PDETerm {
    int equation = 0;
    int variable = 0;
    int dt_order = 0;
    MultiIndex beta;
    Rational coef;
};

struct EquivalentPDE {
    int dim = 1;
    int order = 1;
    std::vector<std::string> variables;  // names of the conserved moments
    std::vector<PDETerm> terms;

    std::vector<PDETerm> terms_of(int equation) const {
        std::vector<PDETerm> out;
        for (const auto& t : terms)
            if (t.equation == equation) out.push_back(t);
        return out;
    }
};

inline bool operator==(const PDETerm& a, const PDETerm& b) {
    return a.equation == b.equation && a.variable == b.variable && a.dt_order == b.dt_order && a.beta == b.beta &&
           a.coef == b.coef;
}

inline bool operator==(const EquivalentPDE& a, const EquivalentPDE& b) {
    return a.dim == b.dim && a.order == b.order && a.variables == b.variables && a.terms == b.terms;
}

inline EquivalentPDE assemble_pde(const ExpansionResult& r, const LatticeScheme& s) {
    EquivalentPDE pde;
    pde.dim = s.d;
    pde.order = r.order;
    for (int w = 0; w < s.n_c; ++w) pde.variables.push_back(s.moment_name(w));
    for (int j = 1; j <= r.order; ++j) {
        const OpMatrix& G = r.Gamma(j);
        for (std::size_t e = 0; e < G.rows(); ++e)
            for (std::size_t v = 0; v < G.cols(); ++v)
                for (const auto& [beta, c] : G(e, v).terms())
                    pde.terms.push_back({static_cast<int>(e), static_cast<int>(v), j - 1, beta, Rational(-c)});
    }
    std::stable_sort(pde.terms.begin(), pde.terms.end(), [](const PDETerm& a, const PDETerm& b) {
        if (a.equation != b.equation) return a.equation < b.equation;
        if (a.dt_order != b.dt_order) return a.dt_order < b.dt_order;
        if (a.beta != b.beta) return GradedLex{}(a.beta, b.beta);
        return a.variable < b.variable;
    });
    return pde;
}

// ---------------------------------------------------------------------------
// Single-relaxation-time comparison

struct BgkReport {
    bool match = false;
    Rational sigma;
    /// Second-order operator predicted from particle sums:
    /// −σ ∂_α∂_β (Σ_j w_j v^α v^β f^eq_j − U^α U^β), U^α = Σ_j w_j v^α f^eq_j.
    DiffPoly expected;
    DiffPoly actual;
    std::string message;
};

/// Compares Γ₂ from the expansion with the single-relaxation-time formula.
/// Requires n_c = 1 and all rates equal.
inline BgkReport bgk_reduce_check(const LatticeScheme& s) {
    require_valid(s);
    if (s.n_c != 1) throw ValidationError("BGK comparison needs a single conserved moment");
    for (const auto& r : s.rates)
        if (r != s.rates.front()) throw ValidationError("BGK comparison needs all relaxation rates equal");

    BgkReport rep;
    rep.sigma = Rational(1) / s.rates.front() - Rational(1, 2);

    // f^eq per unit of conserved moment, from particle space.
    std::vector<Rational> meq{Rational(1)};
    for (std::size_t k = 0; k < s.E.rows(); ++k) meq.push_back(s.E(k, 0));
    const auto feq = particles_of(s, meq);

    const auto d = static_cast<std::size_t>(s.d);
    std::vector<Rational> U(d, Rational(0));
    std::vector<std::vector<Rational>> Pi(d, std::vector<Rational>(d, Rational(0)));
    for (int j = 0; j < s.q; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const Rational wf = s.M(0, ju) * feq[ju];
        for (std::size_t a = 0; a < d; ++a) {
            const Rational va = s.lambda * s.velocities[ju][a];
            U[a] += wf * va;
            for (std::size_t b = 0; b < d; ++b) Pi[a][b] += wf * va * s.lambda * s.velocities[ju][b];
        }
    }
    rep.expected = DiffPoly(s.d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            const Rational c = -rep.sigma * (Pi[a][b] - U[a] * U[b]);
            rep.expected.add_term(MultiIndex::unit(static_cast<int>(a)) + MultiIndex::unit(static_cast<int>(b)), c);
        }

    rep.actual = expand(s, 2).Gamma(2)(0, 0);
    rep.match = rep.expected == rep.actual;
    rep.message = rep.match ? "second-order operator matches the single-relaxation-time formula"
                            : "second-order operator differs from the single-relaxation-time formula";
    return rep;
}

}  // namespace lbmeq
