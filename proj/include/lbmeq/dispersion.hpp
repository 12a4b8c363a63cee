#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lbmeq/expansion.hpp"
#include "lbmeq/opmatrix.hpp"
#include "lbmeq/scheme.hpp"

namespace lbmeq {

/// Matrix of truncated k-series.
using KMatrix = Matrix<KSeries>;

inline KMatrix to_kmatrix(const OpMatrix& op) {
    return op.map([](const DiffPoly& p) { return to_wave_series(p); });
}

inline KMatrix k_constant(const ComplexRationalMatrix& m, int dim, int cap = kDefaultDegreeCap) {
    return m.map([&](const ComplexRational& z) { return KSeries::constant(dim, z, cap); });
}

inline KMatrix k_identity(std::size_t n, int dim, int cap = kDefaultDegreeCap) {
    return KMatrix::identity(n, KSeries::constant(dim, ComplexRational(1), cap), KSeries(dim, cap));
}

/// Keeps only the terms of total degree j.
inline KMatrix k_homogeneous_part(const KMatrix& m, int j) {
    return m.map([j](const KSeries& p) { return p.homogeneous_part(j); });
}

/// Constant term of every entry.
inline ComplexRationalMatrix k_at_zero(const KMatrix& m) {
    return m.map([](const KSeries& p) { return p.coefficient(MultiIndex{}); });
}

/// Deliberate truncation at the cap is not an error for series work.
inline KMatrix k_clear_truncation(KMatrix m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j).clear_truncated();
    return m;
}

/// Relaxation matrix on moments, K = [[I, 0], [S E, I − S]].
inline RationalMatrix relaxation_matrix(const LatticeScheme& s) {
    const auto q = static_cast<std::size_t>(s.q);
    const auto nc = static_cast<std::size_t>(s.n_c);
    RationalMatrix K = RationalMatrix::identity(q, Rational(1), Rational(0));
    for (std::size_t k = 0; k < q - nc; ++k) {
        for (std::size_t w = 0; w < nc; ++w) K(nc + k, w) = s.rates[k] * s.E(k, w);
        K(nc + k, nc + k) = Rational(1) - s.rates[k];
    }
    return K;
}

/// exp(−Λ(ik)) as Σ_{n≤cap} (−Λ(ik))ⁿ / n!. Exact through total degree `cap`
/// because Λ(ik) is homogeneous of degree one.
inline KMatrix exp_minus_series(const OpMatrix& lambda, int dim, int cap = kDefaultDegreeCap) {
    const KMatrix X = -to_kmatrix(lambda);
    KMatrix out = k_identity(lambda.rows(), dim, cap);
    KMatrix power = out;
    Rational fact = 1;
    for (int n = 1; n <= cap; ++n) {
        power = power * X;
        fact *= n;
        out += power.scaled(KSeries::constant(dim, ComplexRational(Rational(1) / fact), cap));
    }
    return k_clear_truncation(out);
}

/// One-step Fourier-space update m(t+Δt) = G(k) m(t) as a series in k.
struct AmplificationSeries {
    int dim = 1;
    int n_c = 1;
    KMatrix G;
};

inline AmplificationSeries amplification_series(const LatticeScheme& s, int cap = kDefaultDegreeCap) {
    require_valid(s);
    const OpMatrix lambda = build_lambda(s, cap);
    AmplificationSeries a;
    a.dim = s.d;
    a.n_c = s.n_c;
    a.G = exp_minus_series(lambda, s.d, cap) * k_constant(to_complex(relaxation_matrix(s)), s.d, cap);
    a.G = k_clear_truncation(a.G);
    return a;
}

/// Reduced dynamics on the slow invariant subspace: the subspace is the graph
/// Y = H(k) W and the conserved moments evolve by W ← R(k) W.
struct SlowSubspace {
    KMatrix R;  // n_c × n_c
    KMatrix H;  // (q−n_c) × n_c
};

/// Solves G [I; H] = [I; H] R degree by degree, starting from the slow
/// subspace of G(0). Throws NumericError when 1 is an eigenvalue of the fast
/// block at k = 0 (degenerate slow eigenvalue).
inline SlowSubspace slow_subspace_series(const AmplificationSeries& a) {
    const auto q = a.G.rows();
    const auto nc = static_cast<std::size_t>(a.n_c);
    const auto ny = q - nc;
    const int cap = kDefaultDegreeCap;
    const KMatrix Gww = a.G.block(0, 0, nc, nc);
    const KMatrix Gwy = a.G.block(0, nc, nc, ny);
    const KMatrix Gyw = a.G.block(nc, 0, ny, nc);
    const KMatrix Gyy = a.G.block(nc, nc, ny, ny);

    const ComplexRationalMatrix Gyy0 = k_at_zero(Gyy);
    const auto fast = inverse(ComplexRationalMatrix::identity(ny, ComplexRational(1), ComplexRational(0)) - Gyy0);
    if (!fast) throw NumericError("degenerate slow eigenvalue: fast block of G(0) has eigenvalue 1");

    // Degree-0 graph: (I − Gyy(0)) H0 = Gyw(0).
    SlowSubspace out;
    out.H = k_constant(*fast * k_at_zero(Gyw), a.dim, cap);
    out.R = k_clear_truncation(Gww + Gwy * out.H);
    out.R = out.R.map([](const KSeries& p) { return p.homogeneous_part(0); });
    for (int n = 1; n <= cap; ++n) {
        const KMatrix Rn = k_homogeneous_part(k_clear_truncation(Gww + Gwy * out.H), n);
        out.R += Rn;
        const KMatrix rhs = k_homogeneous_part(k_clear_truncation(Gyw + Gyy * out.H - out.H * out.R), n);
        out.H += k_constant(*fast, a.dim, cap) * rhs;
    }
    out.R = k_clear_truncation(out.R);
    out.H = k_clear_truncation(out.H);
    return out;
}

/// ln R through the series X − X²/2 + X³/3 − X⁴/4 with X = R − I. R(0) must be I.
inline KMatrix log_series(const KMatrix& R, int dim) {
    const int cap = kDefaultDegreeCap;
    const auto n = R.rows();
    if (k_at_zero(R) != ComplexRationalMatrix::identity(n, ComplexRational(1), ComplexRational(0)))
        throw NumericError("slow block is not the identity at k = 0");
    const KMatrix X = R - k_identity(n, dim, cap);
    KMatrix out = X;
    KMatrix power = X;
    for (int p = 2; p <= cap; ++p) {
        power = k_clear_truncation(power * X);
        const Rational c = Rational(p % 2 == 0 ? -1 : 1, p);
        out += power.scaled(KSeries::constant(dim, ComplexRational(c), cap));
    }
    return k_clear_truncation(out);
}

/// ln of the reduced slow dynamics, n_c × n_c, through degree 4.
inline KMatrix slow_log_matrix(const AmplificationSeries& a) { return log_series(slow_subspace_series(a).R, a.dim); }

/// Coefficients of ln μ(k) for a single conserved moment.
struct DispersionSeries {
    int dim = 1;
    std::map<MultiIndex, ComplexRational, GradedLex> coef;

    static DispersionSeries from(const KSeries& p) {
        DispersionSeries d;
        d.dim = p.dim() > 0 ? p.dim() : 1;
        for (const auto& [beta, c] : p.terms()) d.coef.emplace(beta, c);
        return d;
    }

    ComplexRational at(const MultiIndex& beta) const {
        auto it = coef.find(beta);
        return it == coef.end() ? ComplexRational() : it->second;
    }

    /// Degree-j part as a new series.
    DispersionSeries part(int j) const {
        DispersionSeries out;
        out.dim = dim;
        for (const auto& [beta, c] : coef)
            if (beta.degree() == j) out.coef.emplace(beta, c);
        return out;
    }

    friend bool operator==(const DispersionSeries& a, const DispersionSeries& b) { return a.coef == b.coef; }
};

/// Slow log-amplification series for n_c = 1.
inline DispersionSeries slow_log_series(const AmplificationSeries& a) {
    if (a.n_c != 1) throw ValidationError("slow_log_series needs exactly one conserved moment");
    return DispersionSeries::from(slow_log_matrix(a)(0, 0));
}

/// −Σ_j Γ_j(ik), the log-amplification predicted by the expansion.
inline KMatrix engine_series(const ExpansionResult& r) {
    KMatrix out = -to_kmatrix(r.Gamma(1));
    for (int j = 2; j <= r.order; ++j) out -= to_kmatrix(r.Gamma(j));
    return out;
}

/// E + S⁻¹ Σ_{j≤order} Ψ_j(ik): the slow graph predicted by the expansion.
inline KMatrix engine_graph(const LatticeScheme& s, const ExpansionResult& r) {
    std::vector<Rational> inv_rates;
    for (const auto& x : s.rates) inv_rates.emplace_back(Rational(1) / x);
    const KMatrix sinv = k_constant(to_complex(diagonal(inv_rates)), s.d);
    KMatrix out = k_constant(to_complex(s.E), s.d);
    for (std::size_t j = 0; j < r.psi.size(); ++j) out += sinv * to_kmatrix(r.psi[j]);
    return out;
}

struct SeriesMismatch {
    std::size_t row = 0;
    std::size_t col = 0;
    MultiIndex beta;
    ComplexRational expected;
    ComplexRational actual;
};

struct SeriesComparison {
    bool match = true;
    std::size_t compared_terms = 0;
    std::optional<SeriesMismatch> first_mismatch;
};

/// Exact comparison restricted to total degrees in [lo, hi]. Terms are scanned
/// entry by entry in graded-lex order, so the first mismatch is deterministic.
inline SeriesComparison compare_series(const KMatrix& expected, const KMatrix& actual, int lo = 0,
                                       int hi = kDefaultDegreeCap) {
    if (expected.rows() != actual.rows() || expected.cols() != actual.cols())
        throw ValidationError("compare_series: shapes differ");
    SeriesComparison out;
    for (std::size_t i = 0; i < expected.rows(); ++i)
        for (std::size_t j = 0; j < expected.cols(); ++j) {
            std::map<MultiIndex, int, GradedLex> keys;
            for (const auto& t : expected(i, j).terms()) keys.emplace(t.first, 0);
            for (const auto& t : actual(i, j).terms()) keys.emplace(t.first, 0);
            for (const auto& [beta, unused] : keys) {
                if (beta.degree() < lo || beta.degree() > hi) continue;
                ++out.compared_terms;
                const auto e = expected(i, j).coefficient(beta);
                const auto a = actual(i, j).coefficient(beta);
                if (e != a && out.match) {
                    out.match = false;
                    out.first_mismatch = SeriesMismatch{i, j, beta, e, a};
                }
            }
        }
    return out;
}

// ---------------------------------------------------------------------------
// Floating-point path

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

inline MatrixXd to_eigen(const RationalMatrix& m) {
    MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = to_double(m(i, j));
    return out;
}

/// exp(−Λ(ik)) K evaluated in double precision with a dense matrix exponential.
inline MatrixXcd amplification_matrix(const LatticeScheme& s, const std::vector<double>& k) {
    if (static_cast<int>(k.size()) != s.d) throw ValidationError("wavevector has wrong dimension");
    const auto lk = apply_planewave(build_lambda(s), k);
    MatrixXcd L(static_cast<Eigen::Index>(lk.rows()), static_cast<Eigen::Index>(lk.cols()));
    for (std::size_t i = 0; i < lk.rows(); ++i)
        for (std::size_t j = 0; j < lk.cols(); ++j) L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lk(i, j);
    const MatrixXcd expo = (-L).exp();
    return expo * to_eigen(relaxation_matrix(s)).cast<std::complex<double>>();
}

struct SlowBlockNumeric {
    MatrixXcd R;
    MatrixXcd log_R;
    /// Distance from 1 of the nearest fast eigenvalue divided by that of the
    /// farthest slow one; small values flag a near-degenerate split.
    double separation = 0;
};

/// Slow invariant subspace of a numeric amplification matrix: the n_c
/// eigenvalues closest to 1, written as a graph over W.
inline SlowBlockNumeric slow_block_numeric(const MatrixXcd& G, int n_c) {
    const Eigen::Index q = G.rows();
    const Eigen::Index nc = n_c;
    Eigen::ComplexEigenSolver<MatrixXcd> es(G);
    if (es.info() != Eigen::Success) throw NumericError("eigen decomposition failed");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(q));
    for (Eigen::Index i = 0; i < q; ++i) order[static_cast<std::size_t>(i)] = i;
    const auto& ev = es.eigenvalues();
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return std::abs(ev(a) - 1.0) < std::abs(ev(b) - 1.0); });
    MatrixXcd V(q, nc);
    for (Eigen::Index c = 0; c < nc; ++c) V.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
    const MatrixXcd Vw = V.topRows(nc);
    const MatrixXcd Vy = V.bottomRows(q - nc);
    Eigen::FullPivLU<MatrixXcd> lu(Vw);
    if (!lu.isInvertible()) throw NumericError("slow subspace is not a graph over the conserved moments");
    const MatrixXcd H = Vy * lu.inverse();
    SlowBlockNumeric out;
    out.R = G.topLeftCorner(nc, nc) + G.topRightCorner(nc, q - nc) * H;
    out.log_R = out.R.log();
    const double slow = std::abs(ev(order[static_cast<std::size_t>(nc - 1)]) - 1.0);
    const double fast = q > nc ? std::abs(ev(order[static_cast<std::size_t>(nc)]) - 1.0) : 1.0;
    out.separation = slow > 0 ? fast / slow : std::numeric_limits<double>::infinity();
    return out;
}

struct NumericFitOptions {
    double radius = 0.2;
    int fit_degree = 10;
    int rings = 0;       // 0: max(4, fit_degree)
    int directions = 0;  // 0: chosen from dimension and degree
};

/// Least-squares fit of ln R(k) sampled on concentric rings.
struct NumericDispersion {
    int dim = 1;
    int n_c = 1;
    int fit_degree = 0;
    std::size_t samples = 0;
    /// coef[i][j][β], degrees 1..fit_degree.
    std::vector<std::vector<std::map<MultiIndex, std::complex<double>, GradedLex>>> coef;
    double condition_number = 0;
    double fit_residual = 0;  // max |sample − fitted polynomial|
    double min_separation = 0;

    std::complex<double> at(std::size_t i, std::size_t j, const MultiIndex& beta) const {
        const auto& m = coef.at(i).at(j);
        auto it = m.find(beta);
        return it == m.end() ? std::complex<double>() : it->second;
    }
};

/// Sample wavevectors: `rings` radii r·m/rings (m = 1..rings) times a set of
/// directions; antipodal pairs are always included.
inline std::vector<std::vector<double>> ring_samples(int dim, const NumericFitOptions& o) {
    const int rings = o.rings > 0 ? o.rings : std::max(4, o.fit_degree);
    std::vector<std::vector<double>> dirs;
    if (dim == 1) {
        dirs = {{1.0}, {-1.0}};
    } else if (dim == 2) {
        const int n = o.directions > 0 ? o.directions : 2 * (o.fit_degree + 2);
        for (int m = 0; m < n; ++m) {
            const double th = 2 * std::numbers::pi * (m + 0.5) / n;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
    } else {
        const int half = o.directions > 0 ? o.directions / 2 : (o.fit_degree + 2) * (o.fit_degree + 3) / 2;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int m = 0; m < half; ++m) {
            const double z = 1.0 - (m + 0.5) / half;
            const double rr = std::sqrt(1.0 - z * z);
            const double th = golden * m;
            dirs.push_back({rr * std::cos(th), rr * std::sin(th), z});
            dirs.push_back({-rr * std::cos(th), -rr * std::sin(th), -z});
        }
    }
    std::vector<std::vector<double>> out;
    for (int m = 1; m <= rings; ++m) {
        const double r = o.radius * m / rings;
        for (const auto& d : dirs) {
            std::vector<double> k;
            for (double x : d) k.push_back(r * x);
            out.push_back(std::move(k));
        }
    }
    return out;
}

inline NumericDispersion slow_subspace_series_numeric(const LatticeScheme& s, const std::vector<std::vector<double>>& ks,
                                                      int fit_degree, double scale) {
    require_valid(s);
    std::vector<MultiIndex> monos;
    for (int n = 1; n <= fit_degree; ++n)
        for (const auto& m : monomials_of_degree(s.d, n)) monos.push_back(m);
    const auto P = static_cast<Eigen::Index>(monos.size());
    const auto N = static_cast<Eigen::Index>(ks.size());
    if (N < P) throw NumericError("fewer samples than fitted coefficients");
    const auto nc = static_cast<std::size_t>(s.n_c);

    // Columns scaled by scale^|β| so every column has comparable magnitude.
    MatrixXd A(N, P);
    std::vector<MatrixXcd> values;
    NumericDispersion out;
    out.dim = s.d;
    out.n_c = s.n_c;
    out.fit_degree = fit_degree;
    out.samples = ks.size();
    out.min_separation = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < N; ++r) {
        const auto& k = ks[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < P; ++c) {
            double v = 1;
            for (int a = 0; a < s.d; ++a)
                v *= std::pow(k[static_cast<std::size_t>(a)] / scale, monos[static_cast<std::size_t>(c)].e[static_cast<std::size_t>(a)]);
            A(r, c) = v;
        }
        const auto blk = slow_block_numeric(amplification_matrix(s, k), s.n_c);
        out.min_separation = std::min(out.min_separation, blk.separation);
        values.push_back(blk.log_R);
    }
    Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.condition_number = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(out.condition_number) || out.condition_number > 1e12)
        throw NumericError("ill-conditioned fit (condition number " + std::to_string(out.condition_number) + ")");

    out.coef.assign(nc, std::vector<std::map<MultiIndex, std::complex<double>, GradedLex>>(nc));
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j) {
            Eigen::VectorXcd b(N);
            for (Eigen::Index r = 0; r < N; ++r)
                b(r) = values[static_cast<std::size_t>(r)](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const Eigen::VectorXd re = svd.solve(b.real());
            const Eigen::VectorXd im = svd.solve(b.imag());
            Eigen::VectorXcd x(P);
            for (Eigen::Index c = 0; c < P; ++c) x(c) = {re(c), im(c)};
            const Eigen::VectorXcd resid = A.cast<std::complex<double>>() * x - b;
            out.fit_residual = std::max(out.fit_residual, resid.cwiseAbs().maxCoeff());
            for (Eigen::Index c = 0; c < P; ++c) {
                const auto& beta = monos[static_cast<std::size_t>(c)];
                out.coef[i][j][beta] = x(c) / std::pow(scale, beta.degree());
            }
        }
    return out;
}

/// Radius in options is dimensionless: the rings have |k|·λ·max|v_j| ≤ radius.
inline NumericDispersion slow_subspace_series_numeric(const LatticeScheme& s, const NumericFitOptions& o = {}) {
    double vmax = 0;
    for (const auto& v : s.velocities) {
        double n2 = 0;
        for (const auto& x : v) n2 += to_double(x) * to_double(x);
        vmax = std::max(vmax, std::sqrt(n2));
    }
    NumericFitOptions scaled = o;
    if (vmax > 0) scaled.radius = o.radius / (to_double(s.lambda) * vmax);
    return slow_subspace_series_numeric(s, ring_samples(s.d, scaled), o.fit_degree, scaled.radius);
}

/// Largest |fitted − exact| over all entries and degrees lo..hi.
inline double numeric_residual(const KMatrix& exact, const NumericDispersion& fit, int lo = 1, int hi = kDefaultDegreeCap) {
    double worst = 0;
    for (std::size_t i = 0; i < exact.rows(); ++i)
        for (std::size_t j = 0; j < exact.cols(); ++j)
            for (int n = lo; n <= hi; ++n)
                for (const auto& beta : monomials_of_degree(fit.dim, n))
                    worst = std::max(worst, std::abs(exact(i, j).coefficient(beta).to_complex() - fit.at(i, j, beta)));
    return worst;
}

}  // namespace lbmeq
