#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lbmeq/errors.hpp"
#include "lbmeq/matrix.hpp"
#include "lbmeq/rational.hpp"

namespace lbmeq {

/// One multi-relaxation-time lattice Boltzmann scheme, linearized at a base
/// state. Velocities are stored in units of λ, so the physical velocity of
/// particle j is λ·velocities[j]. Moment rows 0..n_c-1 of M are the conserved
/// moments W, the remaining rows are Y.
struct LatticeScheme {
    std::string name;
    int d = 1;
    int q = 0;
    Rational lambda = 1;
    std::vector<std::vector<Rational>> velocities;
    RationalMatrix M;
    int n_c = 1;
    RationalMatrix E;                  // (q-n_c) x n_c, dΦ at the base state
    std::vector<Rational> offset;      // Φ(W0) - E W0
    std::vector<Rational> rates;       // diagonal of S
    std::vector<Rational> base_state;  // W0
    std::vector<std::pair<std::string, Rational>> parameters;
    std::vector<std::string> moment_names;

    int n_y() const { return q - n_c; }

    /// Name of moment row r, falling back to "m<r>".
    std::string moment_name(int r) const {
        if (r >= 0 && static_cast<std::size_t>(r) < moment_names.size() && !moment_names[static_cast<std::size_t>(r)].empty())
            return moment_names[static_cast<std::size_t>(r)];
        return "m" + std::to_string(r);
    }
};

struct MomentSplit {
    std::vector<int> w_indices;
    std::vector<int> y_indices;
};

inline MomentSplit moment_split(const LatticeScheme& s) {
    MomentSplit out;
    for (int r = 0; r < s.q; ++r) (r < s.n_c ? out.w_indices : out.y_indices).push_back(r);
    return out;
}

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }

    std::string summary() const {
        std::string out;
        for (const auto& e : errors) out += "error: " + e + "\n";
        for (const auto& w : warnings) out += "warning: " + w + "\n";
        return out;
    }
};

/// Checks shapes, M invertibility (exact), and rate positivity. Never throws.
inline ValidationReport validate(const LatticeScheme& s) {
    ValidationReport rep;
    auto err = [&](std::string m) { rep.errors.push_back(std::move(m)); };
    if (s.d < 1 || s.d > 3) err("dimension must be 1, 2 or 3");
    if (s.q < 2) err("need at least two velocities");
    if (s.lambda <= 0) err("lambda must be positive");
    if (static_cast<int>(s.velocities.size()) != s.q) err("expected " + std::to_string(s.q) + " velocities");
    for (std::size_t j = 0; j < s.velocities.size(); ++j)
        if (static_cast<int>(s.velocities[j].size()) != s.d) err("velocity " + std::to_string(j) + " has wrong dimension");
    if (s.n_c < 1 || s.n_c >= s.q) err("conserved count must satisfy 1 <= n_c < q");
    if (!rep.ok()) return rep;

    const auto nq = static_cast<std::size_t>(s.q);
    const auto ny = static_cast<std::size_t>(s.n_y());
    const auto nc = static_cast<std::size_t>(s.n_c);
    if (s.M.rows() != nq || s.M.cols() != nq) {
        err("moment matrix must be " + std::to_string(s.q) + "x" + std::to_string(s.q));
    } else if (rank(s.M) != nq) {
        err("M singular");
    }
    if (s.E.rows() != ny || s.E.cols() != nc) err("equilibrium Jacobian must be " + std::to_string(ny) + "x" + std::to_string(nc));
    if (s.offset.size() != ny) err("equilibrium offset must have " + std::to_string(ny) + " entries");
    if (s.base_state.size() != nc) err("base state must have " + std::to_string(nc) + " entries");
    if (s.rates.size() != ny) {
        err("expected " + std::to_string(ny) + " relaxation rates");
    } else {
        for (std::size_t k = 0; k < ny; ++k) {
            if (s.rates[k] <= 0) {
                err("relaxation rate " + std::to_string(k) + " must be positive");
            } else if (s.rates[k] >= 2) {
                rep.warnings.push_back("relaxation rate " + std::to_string(k) + " = " + to_string(s.rates[k]) +
                                       " outside (0,2)");
            }
        }
    }
    if (!s.moment_names.empty() && s.moment_names.size() != nq) err("moment_names must list " + std::to_string(s.q) + " names");
    return rep;
}

/// Throws ValidationError listing every violated invariant.
inline void require_valid(const LatticeScheme& s) {
    const auto rep = validate(s);
    if (!rep.ok()) throw ValidationError(s.name.empty() ? rep.summary() : s.name + ": " + rep.summary());
}

/// Exact M⁻¹; throws ValidationError when M is singular.
inline RationalMatrix inverse_moment_matrix(const LatticeScheme& s) {
    auto inv = inverse(s.M);
    if (!inv) throw ValidationError("M singular");
    return *inv;
}

inline std::vector<Rational> mat_vec(const RationalMatrix& a, const std::vector<Rational>& x) {
    if (a.cols() != x.size()) throw ValidationError("length mismatch: expected " + std::to_string(a.cols()) + " entries");
    std::vector<Rational> out(a.rows(), Rational(0));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
    return out;
}

/// m = M f.
inline std::vector<Rational> moments_of(const LatticeScheme& s, const std::vector<Rational>& f) {
    return mat_vec(s.M, f);
}

/// f = M⁻¹ m.
inline std::vector<Rational> particles_of(const LatticeScheme& s, const std::vector<Rational>& m) {
    return mat_vec(inverse_moment_matrix(s), m);
}

/// Y^eq = E W + offset.
inline std::vector<Rational> equilibrium_moments(const LatticeScheme& s, const std::vector<Rational>& W) {
    auto y = mat_vec(s.E, W);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += s.offset[k];
    return y;
}

/// Full moment vector (W, Φ(W)).
inline std::vector<Rational> equilibrium_state(const LatticeScheme& s, const std::vector<Rational>& W) {
    auto m = W;
    auto y = equilibrium_moments(s, W);
    m.insert(m.end(), y.begin(), y.end());
    return m;
}

/// Y* = Y + S (Φ(W) − Y), W unchanged.
inline std::vector<Rational> relax_moments(const LatticeScheme& s, const std::vector<Rational>& m) {
    if (static_cast<int>(m.size()) != s.q) throw ValidationError("length mismatch: expected " + std::to_string(s.q) + " moments");
    std::vector<Rational> W(m.begin(), m.begin() + s.n_c);
    const auto yeq = equilibrium_moments(s, W);
    auto out = m;
    for (int k = 0; k < s.n_y(); ++k) {
        const auto r = static_cast<std::size_t>(s.n_c + k);
        out[r] = m[r] + s.rates[static_cast<std::size_t>(k)] * (yeq[static_cast<std::size_t>(k)] - m[r]);
    }
    return out;
}

/// Σ = S⁻¹ − ½ I, diagonal entries.
inline std::vector<Rational> henon_diagonal(const LatticeScheme& s) {
    std::vector<Rational> sigma;
    sigma.reserve(s.rates.size());
    for (const auto& r : s.rates) sigma.emplace_back(Rational(1) / r - Rational(1, 2));
    return sigma;
}

// ---------------------------------------------------------------------------
// Built-in schemes

struct D2Q9Params {
    Rational lambda = 1;
    Rational u = 0;
    Rational v = 0;
    Rational alpha = 1;
    /// (s_jx, s_jy, s_e, s_xx, s_xy, s_qx, s_qy, s_h)
    std::vector<Rational> rates = std::vector<Rational>(8, Rational(1));
};

/// Rates (s_j, s_j, s_e, s_x, s_x, s_q, s_q, s_h).
inline std::vector<Rational> d2q9_rates(const Rational& sj, const Rational& se, const Rational& sx, const Rational& sq,
                                        const Rational& sh) {
    return {sj, sj, se, sx, sx, sq, sq, sh};
}

/// Parameter set used throughout the docs and tests: λ=1, u=1/10, v=0, α=1,
/// s_j=6/5, s_e=7/5, s_x=8/5, s_q=9/5, s_h=1.
inline D2Q9Params d2q9_reference_params() {
    D2Q9Params p;
    p.u = make_rational(1, 10);
    p.rates = d2q9_rates(make_rational(6, 5), make_rational(7, 5), make_rational(8, 5), make_rational(9, 5), Rational(1));
    return p;
}

/// D2Q9 advection-diffusion with moments (ρ, Jx, Jy, ε, XX, XY, qx, qy, h)
/// and equilibrium Φ(ρ) = ρ (u, v, αλ², u²−v², uv, 0, 0, 0).
inline LatticeScheme builtin_d2q9(const D2Q9Params& p) {
    if (p.rates.size() != 8) throw ValidationError("D2Q9 needs 8 relaxation rates");
    for (const auto& r : p.rates)
        if (r <= 0) throw ValidationError("relaxation rates must be positive");
    if (p.lambda <= 0) throw ValidationError("lambda must be positive");

    LatticeScheme s;
    s.name = "d2q9-advection";
    s.d = 2;
    s.q = 9;
    s.lambda = p.lambda;
    const int vx[9] = {0, 1, 0, -1, 0, 1, -1, -1, 1};
    const int vy[9] = {0, 0, 1, 0, -1, 1, 1, -1, -1};
    for (int j = 0; j < 9; ++j) s.velocities.push_back({Rational(vx[j]), Rational(vy[j])});

    // Integer pattern of each row and the power of λ it carries.
    const int rows[9][9] = {
        {1, 1, 1, 1, 1, 1, 1, 1, 1},
        {0, 1, 0, -1, 0, 1, -1, -1, 1},
        {0, 0, 1, 0, -1, 1, 1, -1, -1},
        {-4, -1, -1, -1, -1, 2, 2, 2, 2},
        {0, 1, -1, 1, -1, 0, 0, 0, 0},
        {0, 0, 0, 0, 0, 1, -1, 1, -1},
        {0, -2, 0, 2, 0, 1, -1, -1, 1},
        {0, 0, -2, 0, 2, 1, 1, -1, -1},
        {4, -2, -2, -2, -2, 1, 1, 1, 1},
    };
    const int power[9] = {0, 1, 1, 2, 2, 2, 3, 3, 4};
    s.M = RationalMatrix(9, 9, Rational(0));
    for (int i = 0; i < 9; ++i) {
        Rational lp = 1;
        for (int k = 0; k < power[i]; ++k) lp *= p.lambda;
        for (int j = 0; j < 9; ++j) s.M(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = lp * rows[i][j];
    }

    s.n_c = 1;
    s.E = RationalMatrix(8, 1, Rational(0));
    s.E(0, 0) = p.u;
    s.E(1, 0) = p.v;
    s.E(2, 0) = p.alpha * p.lambda * p.lambda;
    s.E(3, 0) = p.u * p.u - p.v * p.v;
    s.E(4, 0) = p.u * p.v;
    s.offset.assign(8, Rational(0));
    s.rates = p.rates;
    s.base_state = {Rational(1)};
    s.parameters = {{"lambda", p.lambda}, {"u", p.u}, {"v", p.v}, {"alpha", p.alpha}};
    s.moment_names = {"ρ", "Jx", "Jy", "ε", "XX", "XY", "qx", "qy", "h"};
    return s;
}

/// D1Q3 advection-diffusion: moments (ρ, J, e), Φ(ρ) = ρ (u, αλ²).
inline LatticeScheme builtin_d1q3(const Rational& lambda, const Rational& u, const Rational& alpha, const Rational& s_j,
                                  const Rational& s_e) {
    LatticeScheme s;
    s.name = "d1q3-advection";
    s.d = 1;
    s.q = 3;
    s.lambda = lambda;
    s.velocities = {{Rational(0)}, {Rational(1)}, {Rational(-1)}};
    s.M = RationalMatrix(3, 3, Rational(0));
    const Rational l2 = lambda * lambda;
    s.M(0, 0) = 1, s.M(0, 1) = 1, s.M(0, 2) = 1;
    s.M(1, 1) = lambda, s.M(1, 2) = -lambda;
    s.M(2, 1) = l2, s.M(2, 2) = l2;
    s.n_c = 1;
    s.E = RationalMatrix(2, 1, Rational(0));
    s.E(0, 0) = u;
    s.E(1, 0) = alpha * l2;
    s.offset.assign(2, Rational(0));
    s.rates = {s_j, s_e};
    s.base_state = {Rational(1)};
    s.parameters = {{"lambda", lambda}, {"u", u}, {"alpha", alpha}};
    s.moment_names = {"ρ", "J", "e"};
    return s;
}

/// D1Q3 with two conserved moments (ρ, J) and e^eq = (αλ² − u²) ρ + 2u J, the
/// linearization of ρ(αλ²) + J²/ρ at ρ = 1, J = u.
inline LatticeScheme builtin_d1q3_two_conserved(const Rational& lambda, const Rational& u, const Rational& alpha,
                                                const Rational& s_e) {
    LatticeScheme s = builtin_d1q3(lambda, u, alpha, Rational(1), s_e);
    s.name = "d1q3-two-conserved";
    s.n_c = 2;
    s.E = RationalMatrix(1, 2, Rational(0));
    s.E(0, 0) = alpha * lambda * lambda - u * u;
    s.E(0, 1) = 2 * u;
    s.offset = {Rational(0)};
    s.rates = {s_e};
    s.base_state = {Rational(1), u};
    return s;
}

struct BuiltinScheme {
    std::string name;
    std::string description;
    std::function<LatticeScheme()> make;
};

inline const std::vector<BuiltinScheme>& builtin_schemes() {
    static const std::vector<BuiltinScheme> table = {
        {"d2q9-advection", "D2Q9 advection-diffusion, lambda=1 u=1/10 v=0 alpha=1, s=(6/5,7/5,8/5,9/5,1)",
         [] { return builtin_d2q9(d2q9_reference_params()); }},
        {"d1q3-advection", "D1Q3 advection-diffusion, lambda=1 u=1/10 alpha=1/2, s_j=3/2 s_e=4/3",
         [] {
             return builtin_d1q3(Rational(1), make_rational(1, 10), make_rational(1, 2), make_rational(3, 2),
                                 make_rational(4, 3));
         }},
        {"d1q3-two-conserved", "D1Q3 with conserved (rho, J), lambda=1 u=1/10 alpha=1/2, s_e=3/2",
         [] { return builtin_d1q3_two_conserved(Rational(1), make_rational(1, 10), make_rational(1, 2), make_rational(3, 2)); }},
    };
    return table;
}

/// Looks up a built-in by name; throws ValidationError for unknown names.
inline LatticeScheme builtin_scheme(const std::string& name) {
    for (const auto& b : builtin_schemes())
        if (b.name == name) return b.make();
    throw ValidationError("unknown built-in scheme '" + name + "'");
}

}  // namespace lbmeq
