// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "lbmeq/dispersion.hpp"
#include "lbmeq/expansion.hpp"
#include "lbmeq/opmatrix.hpp"
#include "lbmeq/simulator.hpp"
#include "support/test_support.hpp"

using namespace lbmeq;
using lbmeq::testing::r;

namespace {

constexpr double kGoldenSeconds = 1.0;
constexpr double kOracleSeconds = 10.0;
constexpr double kBlockSeconds = 5.0;
constexpr double kBgkSeconds = 1.0;
constexpr double kConvergenceSeconds = 60.0;
constexpr double kRatioO2 = 4.0, kRatioO2Tol = 0.5;
constexpr double kRatioO4 = 16.0, kRatioO4Tol = 4.0;
constexpr double kConservationTol = 1e-13;
constexpr int kConservationSteps = 1000;
constexpr int kConservationGrid = 64;
constexpr double kFourierTol = 1e-11;
constexpr int kFourierSteps = 100;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct D2Q9Binding {
    Rational lambda, u, v, alpha;
    std::vector<Rational> rates;
};

LatticeScheme d2q9(const D2Q9Binding& b) {
    D2Q9Params p;
    p.lambda = b.lambda;
    p.u = b.u;
    p.v = b.v;
    p.alpha = b.alpha;
    p.rates = b.rates;
    return builtin_d2q9(p);
}

std::vector<D2Q9Binding> bindings() {
    return {
        {r(1), r(1, 10), r(0), r(1), d2q9_rates(r(6, 5), r(7, 5), r(8, 5), r(9, 5), r(1))},
        {r(2), r(1, 3), r(-1, 7), r(-1, 2), d2q9_rates(r(3, 2), r(1), r(1, 2), r(5, 4), r(7, 4))},
        {r(1, 2), r(0), r(1, 5), r(2), d2q9_rates(r(1), r(1), r(1), r(1), r(1))},
        {r(3), r(-2, 9), r(1, 4), r(0), d2q9_rates(r(19, 10), r(1, 10), r(4, 3), r(2, 3), r(11, 10))},
    };
}

DiffPoly dx(const Rational& c) { return DiffPoly::monomial(2, MultiIndex::unit(0), c); }
DiffPoly dy(const Rational& c) { return DiffPoly::monomial(2, MultiIndex::unit(1), c); }
DiffPoly laplacian(const Rational& c) {
    return DiffPoly::monomial(2, MultiIndex::from({2, 0}), c) + DiffPoly::monomial(2, MultiIndex::from({0, 2}), c);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// 1. Closed forms of Γ₁, Ψ₁ (momentum rows) and Γ₂ for D2Q9.
Outcome golden_forms() {
    Outcome o;
    int checked = 0;
    for (const auto& b : bindings()) {
        const auto ex = expand(d2q9(b), 2);
        const Rational c = (b.u * b.u + b.v * b.v) / 2 - (r(2, 3) + b.alpha / 6) * b.lambda * b.lambda;
        const Rational sigma_j = 1 / b.rates[0] - r(1, 2);
        const bool ok = ex.Gamma(1)(0, 0) == dx(b.u) + dy(b.v) && ex.Psi(1)(0, 0) == dx(c) && ex.Psi(1)(1, 0) == dy(c) &&
                        ex.Gamma(2)(0, 0) == laplacian(sigma_j * c);
        if (!ok) {
            o.pass = false;
            o.detail = "mismatch at lambda=" + to_string(b.lambda) + " u=" + to_string(b.u);
            return o;
        }
        ++checked;
    }
    o.detail = std::to_string(checked) + " bindings exact";
    return o;
}

// 2. Exact oracle equality of the degree ≤ 4 slow log-amplification series.
Outcome oracle_equality() {
    Outcome o;
    std::vector<LatticeScheme> schemes;
    for (const auto& b : bindings()) schemes.push_back(d2q9(b));
    schemes.push_back(builtin_scheme("d1q3-advection"));
    std::mt19937 rng(2024);
    schemes.push_back(lbmeq::testing::random_scheme(rng, 2, 5, 1));
    schemes.push_back(lbmeq::testing::random_scheme(rng, 1, 4, 1));
    std::size_t terms = 0;
    for (const auto& s : schemes) {
        const auto cmp = compare_series(slow_log_matrix(amplification_series(s)), engine_series(expand(s, 4)), 0, 4);
        terms += cmp.compared_terms;
        if (!cmp.match) {
            o.pass = false;
            o.detail = "mismatch for " + s.name + " at degree " + std::to_string(cmp.first_mismatch->beta.degree());
            return o;
        }
    }
    o.detail = std::to_string(schemes.size()) + " schemes, " + std::to_string(terms) + " terms exact";
    return o;
}

// 3. Block recurrences against the split of Λⁿ, levels 2..4.
Outcome block_identities() {
    Outcome o;
    std::mt19937 rng(7);
    for (int t = 0; t < 20; ++t) {
        const int d = 1 + t % 2, q = 4 + t % 3, nc = 1 + t % 2;
        const OpMatrix L = build_lambda(lbmeq::testing::random_scheme(rng, d, q, nc));
        const BlockPowers bp = block_powers(L, nc, 4);
        const auto& [A, B, C, D] = bp[1];
        bool ok = bp[2].A == A * A + B * C && bp[2].B == A * B + B * D && bp[2].C == C * A + D * C && bp[2].D == C * B + D * D;
        OpMatrix P = L;
        for (int n = 2; n <= 4 && ok; ++n) {
            P = P * L;
            const Blocks direct = block_split(P, nc);
            const Blocks& prev = bp[n - 1];
            ok = bp[n].A == direct.A && bp[n].B == direct.B && bp[n].C == direct.C && bp[n].D == direct.D &&
                 bp[n].A == prev.A * A + prev.B * C && bp[n].D == prev.C * B + prev.D * D;
        }
        if (!ok) {
            o.pass = false;
            o.detail = "scheme " + std::to_string(t) + " fails";
            return o;
        }
    }
    o.detail = "20 schemes, levels 2-4 exact";
    return o;
}

// 4. Equal rates: Γ₂ = −σ[(α+4)/6 λ² − (u²+v²)/2]Δ with σ = 1/s − 1/2.
Outcome bgk_collapse() {
    Outcome o;
    int checked = 0;
    for (auto b : bindings())
        for (const Rational& s : {r(1, 2), r(1), r(6, 5), r(19, 10)}) {
            b.rates.assign(8, s);
            const Rational sigma = 1 / s - r(1, 2);
            const Rational c = (b.alpha + 4) / 6 * b.lambda * b.lambda - (b.u * b.u + b.v * b.v) / 2;
            if (expand(d2q9(b), 2).Gamma(2)(0, 0) != laplacian(-sigma * c)) {
                o.pass = false;
                o.detail = "mismatch at s=" + to_string(s);
                return o;
            }
            ++checked;
        }
    o.detail = std::to_string(checked) + " cases exact";
    return o;
}

// 5. Decay-rate convergence at rest on 32/64/128.
Outcome convergence() {
    Outcome o;
    const LatticeScheme s = lbmeq::testing::d2q9_at_rest();
    const auto series = slow_log_series(amplification_series(s));
    if (!series.part(3).coef.empty()) {
        o.pass = false;
        o.detail = "degree-3 part of the oracle series is not zero";
        return o;
    }
    const auto rows = convergence_study(s, {32, 64, 128}, MeasureOptions{});
    std::ostringstream d;
    d << "Γ3 = 0 verified; ratios o2";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double r2 = rows[i - 1].rel_err / rows[i].rel_err;
        const double r4 = rows[i - 1].rel_err_o4 / rows[i].rel_err_o4;
        o.pass = o.pass && std::abs(r2 - kRatioO2) <= kRatioO2Tol && std::abs(r4 - kRatioO4) <= kRatioO4Tol;
        d << (i == 1 ? " " : ", ") << fmt(r2) << " / o4 " << fmt(r4);
    }
    o.detail = d.str();
    return o;
}

// 6. Relative drift of the conserved total over 1000 steps on 64².
Outcome conservation() {
    Outcome o;
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    Grid<double> g(2, {kConservationGrid, kConservationGrid}, 9);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1e-2, 1e-2);
    const auto meq = equilibrium_state(s, {r(1)});
    set_moments(g, s, [&](std::size_t) {
        std::vector<double> m;
        for (const auto& v : meq) m.push_back(to_double(v) + u(rng));
        return m;
    });
    const double before = conserved_totals(g, s)[0];
    const Stepper<double> st(s);
    double worst = 0;
    for (int t = 0; t < kConservationSteps; ++t) {
        st.step(g);
        worst = std::max(worst, std::abs(conserved_totals(g, s)[0] - before) / std::abs(before));
    }
    o.pass = worst < kConservationTol;
    o.detail = "max relative drift " + fmt(worst);
    return o;
}

// 7. Grid evolution of one mode against powers of the amplification matrix.
Outcome fourier_equivalence() {
    Outcome o;
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const std::vector<int> sizes{32, 32}, kappa{2, 1};
    const Eigen::MatrixXcd G = amplification_matrix(s, mode_wavevector(s, sizes, kappa));
    Grid<double> g(2, sizes, 9);
    std::vector<double> base;
    for (const auto& v : equilibrium_state(s, {r(1)})) base.push_back(to_double(v));
    Eigen::VectorXcd c(9);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-1e-3, 1e-3);
    for (int i = 0; i < 9; ++i) c(i) = {u(rng), u(rng)};
    set_moments(g, s, [&](std::size_t x) {
        const std::complex<double> e = std::polar(1.0, mode_phase(g, kappa, x));
        std::vector<double> m = base;
        for (int i = 0; i < 9; ++i) m[static_cast<std::size_t>(i)] += (c(i) * e).real();
        return m;
    });
    Eigen::VectorXcd want = c / 2.0;
    const Stepper<double> st(s);
    double worst = 0;
    for (int t = 0; t < kFourierSteps; ++t) {
        st.step(g);
        want = G * want;
        worst = std::max(worst, (moment_mode(g, s, kappa) - want).cwiseAbs().maxCoeff() / (c / 2.0).cwiseAbs().maxCoeff());
    }
    o.pass = worst < kFourierTol;
    o.detail = "max relative deviation " + fmt(worst);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "D2Q9 closed forms", kGoldenSeconds, golden_forms},
        {2, "oracle equality", kOracleSeconds, oracle_equality},
        {3, "block identities", kBlockSeconds, block_identities},
        {4, "BGK collapse", kBgkSeconds, bgk_collapse},
        {5, "simulation convergence", kConvergenceSeconds, convergence},
        {6, "conservation", 0, conservation},
        {7, "Fourier equivalence", 0, fourier_equivalence},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.seconds > 0 && secs > c.seconds) {
            out.pass = false;
            out.detail += "; runtime above " + fmt(c.seconds) + " s";
        }
        if (!out.pass) ++failed;
        std::printf("%s criterion %d (%s): %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs);
    }
    return failed == 0 ? 0 : 1;
}
