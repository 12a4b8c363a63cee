#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "lbmeq/expansion.hpp"

namespace lbmeq {

namespace render_detail {

inline const char* axis_name(int a) {
    static const char* names[] = {"x", "y", "z"};
    return names[a];
}

inline std::string superscript(int n) {
    static const char* digits[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
    if (n <= 1) return "";
    std::string out;
    for (char c : std::to_string(n)) out += digits[c - '0'];
    return out;
}

/// Terms of one (equation, variable, Δt-order) group.
struct Group {
    int variable = 0;
    int dt_order = 0;
    std::vector<std::pair<MultiIndex, Rational>> terms;  // Γ coefficients (sign of the left-hand side)
};

/// Groups per equation in PDE order; coefficients flipped to the left-hand
/// side ∂t W + Σ Δt^{j−1} Γ_j W.
inline std::vector<Group> groups_of(const EquivalentPDE& pde, int equation) {
    std::vector<Group> out;
    for (const auto& t : pde.terms_of(equation)) {
        Group* g = nullptr;
        for (auto& x : out)
            if (x.dt_order == t.dt_order && x.variable == t.variable) g = &x;
        if (g == nullptr) g = &out.emplace_back(Group{t.variable, t.dt_order, {}});
        g->terms.emplace_back(t.beta, Rational(-t.coef));
    }
    return out;
}

/// If the group equals c·Δᵐ (m = 1, 2) in dimension ≥ 2, returns (c, m).
inline std::optional<std::pair<Rational, int>> laplacian_power(const Group& g, int dim) {
    if (dim < 2 || g.terms.empty()) return std::nullopt;
    const int deg = g.terms.front().first.degree();
    if (deg != 2 && deg != 4) return std::nullopt;
    const int m = deg / 2;
    // Coefficients of Δᵐ: multinomial m!/(Π γ_a!) on β = 2γ.
    DiffPoly lap(dim);
    for (int a = 0; a < dim; ++a) lap.add_term(MultiIndex::unit(a) + MultiIndex::unit(a), Rational(1));
    DiffPoly target = lap;
    for (int k = 1; k < m; ++k) target = target * lap;
    const Rational lead = target.coefficient(g.terms.front().first);
    if (lead == 0) return std::nullopt;
    const Rational c = g.terms.front().second / lead;
    DiffPoly have(dim);
    for (const auto& [beta, coef] : g.terms) have.add_term(beta, coef);
    if (have != target.scaled(c)) return std::nullopt;
    return std::make_pair(c, m);
}

inline std::string dt_factor_text(int k) {
    if (k == 0) return "";
    return "Δt" + superscript(k) + "·";
}

inline std::string coef_text(const Rational& a) {
    if (a == 1) return "";
    if (a.get_den() == 1) return a.get_num().get_str();
    return "(" + to_string(a) + ")";
}

inline std::string monomial_text(const MultiIndex& beta, int dim) {
    std::string out;
    for (int a = 0; a < dim; ++a) {
        const int e = beta.e[static_cast<std::size_t>(a)];
        if (e > 0) out += std::string("∂") + axis_name(a) + superscript(e);
    }
    return out;
}

inline std::string latex_name(const std::string& n) {
    static const std::map<std::string, std::string> greek = {
        {"ρ", "\\rho"}, {"ε", "\\varepsilon"}, {"α", "\\alpha"}, {"σ", "\\sigma"}, {"θ", "\\theta"}, {"φ", "\\varphi"}};
    auto it = greek.find(n);
    if (it != greek.end()) return it->second;
    if (n.size() == 1) return n;
    return "\\mathrm{" + n + "}";
}

inline std::string latex_coef(const Rational& a) {
    if (a == 1) return "";
    return to_latex(a) + " \\, ";
}

inline std::string latex_dt(int k) {
    if (k == 0) return "";
    if (k == 1) return "\\Delta t \\, ";
    return "\\Delta t^{" + std::to_string(k) + "} \\, ";
}

inline std::string latex_monomial(const MultiIndex& beta, int dim) {
    std::string out;
    for (int a = 0; a < dim; ++a) {
        const int e = beta.e[static_cast<std::size_t>(a)];
        if (e == 0) continue;
        out += std::string("\\partial_") + axis_name(a);
        if (e > 1) out += "^{" + std::to_string(e) + "}";
        out += " ";
    }
    return out;
}

}  // namespace render_detail

/// Plain-text rendering, one line per conserved moment, e.g.
/// "∂t ρ + (1/10)∂x ρ − Δt·(497/1800)Δρ = O(Δt²)".
inline std::string render_text(const EquivalentPDE& pde) {
    using namespace render_detail;
    std::string out;
    for (std::size_t e = 0; e < pde.variables.size(); ++e) {
        std::string line = "∂t " + pde.variables[e];
        auto emit = [&](const Rational& c, int dt, const std::string& op, const std::string& sep, const std::string& var) {
            line += c < 0 ? " − " : " + ";
            line += dt_factor_text(dt) + coef_text(abs(c)) + op + sep + var;
        };
        for (const auto& g : groups_of(pde, static_cast<int>(e))) {
            const std::string& var = pde.variables[static_cast<std::size_t>(g.variable)];
            if (auto lp = laplacian_power(g, pde.dim)) {
                emit(lp->first, g.dt_order, lp->second == 1 ? "Δ" : "Δ²", "", var);
                continue;
            }
            for (const auto& [beta, c] : g.terms) emit(c, g.dt_order, monomial_text(beta, pde.dim), " ", var);
        }
        line += " = O(Δt" + superscript(pde.order) + ")";
        out += line + "\n";
    }
    return out;
}

/// LaTeX rendering, one equation per line.
inline std::string render_latex(const EquivalentPDE& pde) {
    using namespace render_detail;
    std::string out;
    for (std::size_t e = 0; e < pde.variables.size(); ++e) {
        std::string line = "\\partial_t " + latex_name(pde.variables[e]);
        auto emit = [&](const Rational& c, int dt, const std::string& op, const std::string& var) {
            line += c < 0 ? " - " : " + ";
            line += latex_dt(dt) + latex_coef(abs(c)) + op + var;
        };
        for (const auto& g : groups_of(pde, static_cast<int>(e))) {
            const std::string var = latex_name(pde.variables[static_cast<std::size_t>(g.variable)]);
            if (auto lp = laplacian_power(g, pde.dim)) {
                emit(lp->first, g.dt_order, lp->second == 1 ? "\\Delta " : "\\Delta^{2} ", var);
                continue;
            }
            for (const auto& [beta, c] : g.terms) emit(c, g.dt_order, latex_monomial(beta, pde.dim), var);
        }
        line += " = O(\\Delta t";
        if (pde.order > 1) line += "^{" + std::to_string(pde.order) + "}";
        line += ")";
        out += line + "\n";
    }
    return out;
}

}  // namespace lbmeq
