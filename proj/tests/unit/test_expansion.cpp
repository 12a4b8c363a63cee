#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "lbmeq/expansion.hpp"
#include "lbmeq/json_io.hpp"
#include "lbmeq/render.hpp"
#include "support/test_support.hpp"

using namespace lbmeq;
using lbmeq::testing::r;

namespace {

struct Binding {
    Rational lambda, u, v, alpha;
    std::vector<Rational> rates;
};

std::vector<Binding> bindings() {
    return {
        {r(1), r(1, 10), r(0), r(1), d2q9_rates(r(6, 5), r(7, 5), r(8, 5), r(9, 5), r(1))},
        {r(2), r(1, 3), r(-1, 7), r(-1, 2), d2q9_rates(r(3, 2), r(1), r(1, 2), r(5, 4), r(7, 4))},
        {r(1, 2), r(0), r(1, 5), r(2), d2q9_rates(r(1), r(1), r(1), r(1), r(1))},
        {r(3), r(-2, 9), r(1, 4), r(0), d2q9_rates(r(19, 10), r(1, 10), r(4, 3), r(2, 3), r(11, 10))},
    };
}

LatticeScheme d2q9(const Binding& b) {
    D2Q9Params p;
    p.lambda = b.lambda;
    p.u = b.u;
    p.v = b.v;
    p.alpha = b.alpha;
    p.rates = b.rates;
    return builtin_d2q9(p);
}

DiffPoly dx(const Rational& c) { return DiffPoly::monomial(2, MultiIndex::unit(0), c); }
DiffPoly dy(const Rational& c) { return DiffPoly::monomial(2, MultiIndex::unit(1), c); }
DiffPoly laplacian(const Rational& c) {
    return DiffPoly::monomial(2, MultiIndex::from({2, 0}), c) + DiffPoly::monomial(2, MultiIndex::from({0, 2}), c);
}

/// Coefficient (u²+v²)/2 − (2/3 + α/6)λ².
Rational psi_coefficient(const Binding& b) {
    return (b.u * b.u + b.v * b.v) / 2 - (r(2, 3) + b.alpha / 6) * b.lambda * b.lambda;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST(ExpandD2Q9, FirstOrderIsAdvection) {
    for (const auto& b : bindings()) {
        const auto ex = expand(d2q9(b), 1);
        EXPECT_EQ(ex.Gamma(1)(0, 0), dx(b.u) + dy(b.v));
    }
}

TEST(ExpandD2Q9, FirstNonEquilibriumMomentumRows) {
    for (const auto& b : bindings()) {
        const auto ex = expand(d2q9(b), 2);
        const Rational c = psi_coefficient(b);
        EXPECT_EQ(ex.Psi(1)(0, 0), dx(c));
        EXPECT_EQ(ex.Psi(1)(1, 0), dy(c));
    }
}

TEST(ExpandD2Q9, SecondOrderIsIsotropicDiffusion) {
    for (const auto& b : bindings()) {
        const auto ex = expand(d2q9(b), 2);
        const Rational sigma_j = 1 / b.rates[0] - r(1, 2);
        EXPECT_EQ(ex.Gamma(2)(0, 0), laplacian(sigma_j * psi_coefficient(b)));
    }
}

TEST(ExpandD2Q9, ReferenceBindingValues) {
    const auto ex = expand(builtin_d2q9(d2q9_reference_params()), 4);
    EXPECT_EQ(ex.Gamma(2)(0, 0), laplacian(r(-497, 1800)));
    EXPECT_EQ(ex.Psi(1)(0, 0), dx(r(-497, 600)));
}

TEST(ExpandD2Q9, AtRestThirdOrderVanishes) {
    const auto ex = expand(lbmeq::testing::d2q9_at_rest(), 4);
    EXPECT_TRUE(ex.Gamma(1)(0, 0).is_zero());
    EXPECT_EQ(ex.Gamma(2)(0, 0), laplacian(r(-5, 18)));
    EXPECT_TRUE(ex.Gamma(3)(0, 0).is_zero());
    EXPECT_FALSE(ex.Gamma(4)(0, 0).is_zero());
}

TEST(ExpandD2Q9, DiffusionSignIsDissipative) {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> rate(1, 19);
    for (int t = 0; t < 30; ++t) {
        Binding b{r(1), r(rate(rng) - 10, 40), r(rate(rng) - 10, 40), r(rate(rng) - 10, 10), {}};
        for (int k = 0; k < 8; ++k) b.rates.push_back(r(rate(rng), 10));
        b.rates[1] = b.rates[0];
        if ((b.alpha + 4) * b.lambda * b.lambda / 6 <= (b.u * b.u + b.v * b.v) / 2) continue;
        const auto g2 = expand(d2q9(b), 2).Gamma(2)(0, 0);
        EXPECT_LT(g2.coefficient(MultiIndex::from({2, 0})), 0);
        EXPECT_LT(g2.coefficient(MultiIndex::from({0, 2})), 0);
    }
}

TEST(Expand, EveryTermHasTheExpectedDegree) {
    std::mt19937 rng(41);
    for (int t = 0; t < 12; ++t) {
        const LatticeScheme s = lbmeq::testing::random_scheme(rng, 1 + t % 2, 4 + t % 3, 1 + t % 2);
        const auto ex = expand(s, 4);
        for (int j = 1; j <= 4; ++j) {
            EXPECT_TRUE(op_homogeneous(ex.Gamma(j), j)) << "Γ" << j;
            EXPECT_EQ(ex.Gamma(j).rows(), static_cast<std::size_t>(s.n_c));
        }
        for (int j = 1; j <= 3; ++j) {
            EXPECT_TRUE(op_homogeneous(ex.Psi(j), j)) << "Ψ" << j;
            EXPECT_EQ(ex.Psi(j).rows(), static_cast<std::size_t>(s.n_y()));
        }
    }
}

TEST(Expand, ZeroVelocitiesGiveZeroExpansion) {
    std::mt19937 rng(43);
    LatticeScheme s = lbmeq::testing::random_scheme(rng, 2, 6, 2);
    for (auto& v : s.velocities) v.assign(2, r(0));
    const auto ex = expand(s, 4);
    for (const auto& g : ex.gamma) EXPECT_TRUE(op_is_zero(g));
    for (const auto& p : ex.psi) EXPECT_TRUE(op_is_zero(p));
}

TEST(Expand, LowerOrdersArePrefixes) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const auto full = expand(s, 4);
    for (int order = 1; order <= 3; ++order) {
        const auto part = expand(s, order);
        for (int j = 1; j <= order; ++j) EXPECT_EQ(part.Gamma(j), full.Gamma(j));
    }
}

TEST(Expand, EqualRatesInvariantUnderRelabeling) {
    std::mt19937 rng(47);
    for (int t = 0; t < 5; ++t) {
        LatticeScheme s = lbmeq::testing::random_scheme(rng, 2, 6, 1);
        s.rates.assign(s.rates.size(), r(4, 3));
        const auto base = expand(s, 4);

        // Reverse the order of the nonconserved rows.
        LatticeScheme p = s;
        const std::size_t ny = static_cast<std::size_t>(s.n_y());
        for (std::size_t k = 0; k < ny; ++k) {
            for (std::size_t j = 0; j < 6; ++j) p.M(1 + k, j) = s.M(1 + (ny - 1 - k), j);
            p.E(k, 0) = s.E(ny - 1 - k, 0);
        }
        const auto permuted = expand(p, 4);
        for (int j = 1; j <= 4; ++j) EXPECT_EQ(permuted.Gamma(j), base.Gamma(j));

        // Any invertible recombination of the nonconserved rows.
        const RationalMatrix T = lbmeq::testing::random_invertible(rng, static_cast<int>(ny), 2);
        LatticeScheme mixed = s;
        const RationalMatrix MY = T * s.M.block(1, 0, ny, 6);
        mixed.M.set_block(1, 0, MY);
        mixed.E = T * s.E;
        const auto recombined = expand(mixed, 4);
        for (int j = 1; j <= 4; ++j) EXPECT_EQ(recombined.Gamma(j), base.Gamma(j));
    }
}

TEST(Expand, RejectsBadOrdersAndSmallCaps) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    EXPECT_THROW(expand(s, 0), ValidationError);
    EXPECT_THROW(expand(s, 5), ValidationError);
    EXPECT_THROW(expand(s, 4, 3), TruncationError);
    EXPECT_NO_THROW(expand(s, 2, 2));
}

TEST(Expand, IsDeterministic) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    EXPECT_EQ(to_json(expand(s, 4)).dump(), to_json(expand(s, 4)).dump());
}

TEST(Bgk, UnitRateGivesHalfTheCoefficient) {
    for (auto b : bindings()) {
        b.rates.assign(8, r(1));
        const LatticeScheme s = d2q9(b);
        const auto rep = bgk_reduce_check(s);
        EXPECT_TRUE(rep.match) << rep.message;
        EXPECT_EQ(rep.sigma, r(1, 2));
        const Rational c = (b.alpha + 4) / 6 * b.lambda * b.lambda - (b.u * b.u + b.v * b.v) / 2;
        EXPECT_EQ(expand(s, 2).Gamma(2)(0, 0), laplacian(-r(1, 2) * c));
    }
}

TEST(Bgk, RateTwoHasNoDiffusion) {
    auto b = bindings()[1];
    b.rates.assign(8, r(2));
    const auto rep = bgk_reduce_check(d2q9(b));
    EXPECT_TRUE(rep.match);
    EXPECT_EQ(rep.sigma, 0);
    EXPECT_TRUE(rep.actual.is_zero());
}

TEST(Bgk, AtRestDiffusivity) {
    D2Q9Params p;
    p.rates.assign(8, r(6, 5));
    const LatticeScheme s = builtin_d2q9(p);
    const auto rep = bgk_reduce_check(s);
    EXPECT_TRUE(rep.match);
    // σ (α+4)/6 λ² = (1/3)(5/6).
    EXPECT_EQ(rep.actual, laplacian(r(-5, 18)));
}

TEST(Bgk, RandomEqualRateSchemes) {
    std::mt19937 rng(53);
    for (int t = 0; t < 10; ++t) {
        LatticeScheme s = lbmeq::testing::random_scheme(rng, 2, 6, 1);
        // Mass row first so that the particle-sum formula applies.
        for (std::size_t j = 0; j < 6; ++j) s.M(0, j) = 1;
        if (rank(s.M) != 6) continue;
        s.rates.assign(5, lbmeq::testing::random_rate(rng));
        const auto rep = bgk_reduce_check(s);
        EXPECT_TRUE(rep.match) << rep.message;
    }
}

TEST(Bgk, UnequalRatesRejected) {
    EXPECT_THROW(bgk_reduce_check(builtin_d2q9(d2q9_reference_params())), ValidationError);
    EXPECT_THROW(bgk_reduce_check(builtin_scheme("d1q3-two-conserved")), ValidationError);
}

TEST(Pde, TermsAreSortedAndGraded) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const EquivalentPDE pde = assemble_pde(expand(s, 4), s);
    ASSERT_FALSE(pde.terms.empty());
    for (const auto& t : pde.terms) EXPECT_EQ(t.beta.degree(), t.dt_order + 1);
    for (std::size_t i = 1; i < pde.terms.size(); ++i) {
        const auto& a = pde.terms[i - 1];
        const auto& b = pde.terms[i];
        const bool ordered = a.dt_order < b.dt_order || (a.dt_order == b.dt_order && GradedLex{}(a.beta, b.beta));
        EXPECT_TRUE(ordered) << "term " << i;
    }
    EXPECT_EQ(pde.terms.front().coef, r(-1, 10));
}

TEST(Pde, FirstOrderAtRestIsTrivial) {
    const LatticeScheme s = lbmeq::testing::d2q9_at_rest();
    const EquivalentPDE pde = assemble_pde(expand(s, 1), s);
    EXPECT_TRUE(pde.terms.empty());
    EXPECT_EQ(render_text(pde), "∂t ρ = O(Δt)\n");
}

TEST(Pde, FirstOrderIsPureAdvection) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const EquivalentPDE pde = assemble_pde(expand(s, 1), s);
    ASSERT_EQ(pde.terms.size(), 1u);
    EXPECT_EQ(pde.terms[0].dt_order, 0);
    EXPECT_EQ(render_text(pde), "∂t ρ + (1/10)∂x ρ = O(Δt)\n");
}

TEST(Pde, MatchesGoldenFiles) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const EquivalentPDE pde = assemble_pde(expand(s, 4), s);
    const std::string dir = std::string(LBMEQ_TEST_DATA) + "/golden/";
    const std::string json = read_file(dir + "d2q9_advection_order4.json");
    ASSERT_FALSE(json.empty());
    EXPECT_EQ(pde_from_json(Json::parse(json)), pde);
    EXPECT_EQ(to_json(pde).dump(2) + "\n", json);
    EXPECT_EQ(render_text(pde), read_file(dir + "d2q9_advection_order4.txt"));
    EXPECT_EQ(render_latex(pde), read_file(dir + "d2q9_advection_order4.tex"));
}

TEST(Pde, TwoConservedMomentsKeepVariables) {
    const LatticeScheme s = builtin_scheme("d1q3-two-conserved");
    const EquivalentPDE pde = assemble_pde(expand(s, 2), s);
    EXPECT_EQ(pde.variables, (std::vector<std::string>{"ρ", "J"}));
    bool cross = false;
    for (const auto& t : pde.terms) cross = cross || t.equation != t.variable;
    EXPECT_TRUE(cross);
    EXPECT_EQ(render_text(pde).substr(0, std::string("∂t ρ + ∂x J").size()), "∂t ρ + ∂x J");
}
