#include <gtest/gtest.h>

#include <random>

#include "lbmeq/dispersion.hpp"
#include "lbmeq/json_io.hpp"
#include "support/test_support.hpp"

using namespace lbmeq;
using lbmeq::testing::r;

namespace {

ComplexRational cr(const Rational& re, const Rational& im = Rational(0)) { return {re, im}; }

std::vector<LatticeScheme> oracle_schemes() {
    std::vector<LatticeScheme> out;
    for (const auto& b : builtin_schemes()) out.push_back(b.make());
    D2Q9Params p = d2q9_reference_params();
    p.lambda = r(2);
    p.u = r(1, 3);
    p.v = r(-1, 5);
    p.alpha = r(-1, 2);
    p.rates = d2q9_rates(r(3, 2), r(1), r(1, 2), r(5, 4), r(7, 4));
    out.push_back(builtin_d2q9(p));
    out.push_back(lbmeq::testing::d2q9_at_rest());
    std::mt19937 rng(61);
    out.push_back(lbmeq::testing::random_scheme(rng, 2, 5, 1));
    out.push_back(lbmeq::testing::random_scheme(rng, 1, 4, 2));
    return out;
}

}  // namespace

TEST(Amplification, AtZeroIsTheRelaxationMatrix) {
    for (const auto& s : oracle_schemes()) {
        const auto a = amplification_series(s);
        const auto K = to_complex(relaxation_matrix(s));
        EXPECT_EQ(k_at_zero(a.G), K) << s.name;
    }
}

TEST(Amplification, RelaxationMatrixBlocks) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const RationalMatrix K = relaxation_matrix(s);
    EXPECT_EQ(K(0, 0), 1);
    for (std::size_t j = 1; j < 9; ++j) EXPECT_EQ(K(0, j), 0);
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_EQ(K(1 + k, 0), s.rates[k] * s.E(k, 0));
        EXPECT_EQ(K(1 + k, 1 + k), 1 - s.rates[k]);
    }
}

TEST(Amplification, TraceAtZero) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const auto G0 = k_at_zero(amplification_series(s).G);
    ComplexRational trace;
    for (std::size_t i = 0; i < 9; ++i) trace += G0(i, i);
    Rational want = 1;
    for (const auto& x : s.rates) want += 1 - x;
    EXPECT_EQ(trace, cr(want));
}

TEST(Amplification, ScalarExponentialSeries) {
    // A single population moving with λ = 3/2 and no relaxation.
    const Rational l = r(3, 2);
    OpMatrix L(1, 1);
    L(0, 0) = DiffPoly::monomial(1, MultiIndex::unit(0), l);
    const KSeries e = exp_minus_series(L, 1)(0, 0);
    EXPECT_EQ(e.coefficient(MultiIndex::from({0})), cr(r(1)));
    EXPECT_EQ(e.coefficient(MultiIndex::from({1})), cr(r(0), -l));
    EXPECT_EQ(e.coefficient(MultiIndex::from({2})), cr(-l * l / 2));
    EXPECT_EQ(e.coefficient(MultiIndex::from({3})), cr(r(0), l * l * l / 6));
    EXPECT_EQ(e.coefficient(MultiIndex::from({4})), cr(l * l * l * l / 24));
    EXPECT_FALSE(e.truncated());
    // Its logarithm is exactly −iλk.
    const KMatrix lg = log_series(exp_minus_series(L, 1), 1);
    KSeries want(1);
    want.add_term(MultiIndex::from({1}), cr(r(0), -l));
    EXPECT_EQ(lg(0, 0), want);
}

TEST(Amplification, MatchesSeriesAtSmallWavevectors) {
    // Degree-4 truncation error is O(|k|^5).
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const auto a = amplification_series(s);
    const std::vector<double> k{1e-3, -2e-3};
    const auto G = amplification_matrix(s, k);
    double worst = 0;
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) {
            const auto num = a.G(i, j).map_coefficients([](const MultiIndex&, const ComplexRational& c) { return c.to_complex(); });
            const auto v = num.evaluate(std::vector<std::complex<double>>{k[0], k[1]});
            worst = std::max(worst, std::abs(v - G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
    EXPECT_LT(worst, 1e-12);
}

TEST(Oracle, EngineAgreesExactlyForEveryScheme) {
    for (const auto& s : oracle_schemes()) {
        const auto ex = expand(s, 4);
        const auto cmp = compare_series(slow_log_matrix(amplification_series(s)), engine_series(ex), 0, 4);
        EXPECT_TRUE(cmp.match) << s.name;
        EXPECT_GT(cmp.compared_terms, 0u);
    }
}

TEST(Oracle, RandomSchemesAgreeExactly) {
    std::mt19937 rng(67);
    for (int t = 0; t < 8; ++t) {
        const LatticeScheme s = lbmeq::testing::random_scheme(rng, 1 + t % 2, 4 + t % 2, 1 + t % 2);
        const auto cmp = compare_series(slow_log_matrix(amplification_series(s)), engine_series(expand(s, 4)), 0, 4);
        EXPECT_TRUE(cmp.match) << "scheme " << t;
    }
}

TEST(Oracle, SlowGraphAgreesWithNonEquilibriumCorrections) {
    // Y = E W + S⁻¹ Σ Ψ_j W to degree 3.
    for (const auto& s : oracle_schemes()) {
        const auto H = slow_subspace_series(amplification_series(s)).H;
        const auto cmp = compare_series(H, engine_graph(s, expand(s, 4)), 0, 3);
        EXPECT_TRUE(cmp.match) << s.name;
    }
}

TEST(Oracle, AtRestDiffusionCoefficient) {
    const auto series = slow_log_series(amplification_series(lbmeq::testing::d2q9_at_rest()));
    EXPECT_EQ(series.at(MultiIndex::from({2, 0})), cr(r(-5, 18)));
    EXPECT_EQ(series.at(MultiIndex::from({0, 2})), cr(r(-5, 18)));
    EXPECT_EQ(series.at(MultiIndex::from({1, 1})), cr(r(0)));
    EXPECT_TRUE(series.part(1).coef.empty());
    EXPECT_TRUE(series.part(3).coef.empty());
}

TEST(Oracle, CorruptedCoefficientIsDetected) {
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    auto ex = expand(s, 4);
    ex.gamma[2](0, 0).add_term(MultiIndex::from({1, 2}), r(1, 1000));
    const auto cmp = compare_series(slow_log_matrix(amplification_series(s)), engine_series(ex), 0, 4);
    ASSERT_FALSE(cmp.match);
    EXPECT_EQ(cmp.first_mismatch->beta, MultiIndex::from({1, 2}));
}

TEST(Oracle, RealityAndConjugation) {
    // Velocity sets closed under v → −v with real data: even degrees real, odd imaginary.
    for (const auto& name : {"d2q9-advection", "d1q3-advection"}) {
        const auto series = slow_log_series(amplification_series(builtin_scheme(name)));
        for (const auto& [beta, c] : series.coef) {
            if (beta.degree() % 2 == 0)
                EXPECT_EQ(c.im, 0) << name;
            else
                EXPECT_EQ(c.re, 0) << name;
        }
        // ln μ(−k) = conj(ln μ(k)).
        for (const auto& [beta, c] : series.coef) {
            const ComplexRational flipped = beta.degree() % 2 == 0 ? c : ComplexRational(-c.re, -c.im);
            EXPECT_EQ(flipped, c.conj()) << name;
        }
    }
}

TEST(Oracle, DissipativeSecondOrderPart) {
    const auto series = slow_log_series(amplification_series(builtin_d2q9(d2q9_reference_params())));
    for (const auto& [beta, c] : series.part(2).coef) EXPECT_LE(c.re, 0);
}

TEST(Oracle, DegenerateSlowEigenvalueThrows) {
    AmplificationSeries a;
    a.dim = 1;
    a.n_c = 1;
    a.G = k_constant(ComplexRationalMatrix::identity(2, cr(r(1)), cr(r(0))), 1);
    EXPECT_THROW(slow_subspace_series(a), NumericError);
}

TEST(Oracle, ScalarPathNeedsOneConservedMoment) {
    EXPECT_THROW(slow_log_series(amplification_series(builtin_scheme("d1q3-two-conserved"))), ValidationError);
}

TEST(DispersionJson, RoundTrip) {
    const auto series = slow_log_series(amplification_series(builtin_d2q9(d2q9_reference_params())));
    const Json j = to_json(series);
    EXPECT_EQ(dispersion_from_json(j), series);
    EXPECT_EQ(j.at("terms").at(0).at("beta"), Json::array({1, 0}));
    EXPECT_EQ(j.at("terms").at(0).at("re"), "0");
    EXPECT_EQ(j.at("terms").at(0).at("im"), "-1/10");
}

TEST(Numeric, SingleConservedMatchesExactSeries) {
    // Random schemes have O(10²) advection and are outside any fixed ring; the exact path covers them.
    for (const auto& s : oracle_schemes()) {
        if (s.n_c != 1 || s.name == "random") continue;
        const auto fit = slow_subspace_series_numeric(s);
        const double res = numeric_residual(slow_log_matrix(amplification_series(s)), fit);
        EXPECT_LT(res, 1e-10 * std::pow(to_double(s.lambda), 4)) << s.name << " lambda " << s.lambda;
        EXPECT_LT(fit.condition_number, 1e12);
    }
}

TEST(Numeric, TwoConservedMatchesEngine) {
    const LatticeScheme s = builtin_scheme("d1q3-two-conserved");
    const auto fit = slow_subspace_series_numeric(s);
    EXPECT_LT(numeric_residual(engine_series(expand(s, 4)), fit), 1e-8);
    EXPECT_GT(fit.min_separation, 1.0);
}

TEST(Numeric, SmallCircleRecoversSecondOrder) {
    NumericFitOptions o;
    o.radius = 1e-2;
    o.fit_degree = 4;
    const LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    const auto fit = slow_subspace_series_numeric(s, o);
    EXPECT_LT(numeric_residual(engine_series(expand(s, 4)), fit, 2, 2), 1e-8);
}

TEST(Numeric, ZeroVelocityFitsVanish) {
    LatticeScheme s = builtin_d2q9(d2q9_reference_params());
    for (auto& v : s.velocities) v.assign(2, r(0));
    const auto fit = slow_subspace_series_numeric(s);
    for (const auto& [beta, c] : fit.coef[0][0]) EXPECT_LT(std::abs(c), 1e-12);
}

TEST(Numeric, SampleSetIsSymmetric) {
    NumericFitOptions o;
    const auto ks = ring_samples(2, o);
    EXPECT_EQ(ks.size() % 2, 0u);
    for (const auto& k : ks) {
        bool found = false;
        for (const auto& m : ks) found = found || (std::abs(m[0] + k[0]) < 1e-15 && std::abs(m[1] + k[1]) < 1e-15);
        EXPECT_TRUE(found);
    }
}
