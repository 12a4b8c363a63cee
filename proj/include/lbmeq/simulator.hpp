#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lbmeq/dispersion.hpp"
#include "lbmeq/expansion.hpp"
#include "lbmeq/scheme.hpp"

namespace lbmeq {

/// Periodic grid of particle populations; site spacing is λΔt so every
/// integer velocity (in units of λ) moves a particle by whole sites.
template <class T>
class Grid {
public:
    Grid(int dim, std::vector<int> sizes, int q) : dim_(dim), sizes_(std::move(sizes)), q_(q) {
        if (static_cast<int>(sizes_.size()) != dim_) throw ValidationError("grid: one size per dimension required");
        sites_ = 1;
        for (int n : sizes_) {
            if (n < 1) throw ValidationError("grid sizes must be positive");
            sites_ *= static_cast<std::size_t>(n);
        }
        f_.assign(sites_ * static_cast<std::size_t>(q_), T(0));
    }

    int dim() const { return dim_; }
    int q() const { return q_; }
    const std::vector<int>& sizes() const { return sizes_; }
    std::size_t sites() const { return sites_; }

    T& f(int j, std::size_t site) { return f_[static_cast<std::size_t>(j) * sites_ + site]; }
    const T& f(int j, std::size_t site) const { return f_[static_cast<std::size_t>(j) * sites_ + site]; }

    /// Lattice coordinates of a flat site index (x fastest).
    std::array<int, kMaxDim> coords(std::size_t site) const {
        std::array<int, kMaxDim> c{};
        for (int a = 0; a < dim_; ++a) {
            c[static_cast<std::size_t>(a)] = static_cast<int>(site % static_cast<std::size_t>(sizes_[static_cast<std::size_t>(a)]));
            site /= static_cast<std::size_t>(sizes_[static_cast<std::size_t>(a)]);
        }
        return c;
    }

    std::size_t index(const std::array<int, kMaxDim>& c) const {
        std::size_t idx = 0;
        for (int a = dim_ - 1; a >= 0; --a) {
            const int n = sizes_[static_cast<std::size_t>(a)];
            const int x = ((c[static_cast<std::size_t>(a)] % n) + n) % n;
            idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(x);
        }
        return idx;
    }

    std::vector<T>& raw() { return f_; }
    const std::vector<T>& raw() const { return f_; }

private:
    int dim_;
    std::vector<int> sizes_;
    int q_;
    std::size_t sites_ = 0;
    std::vector<T> f_;
};

namespace sim_detail {
template <class T>
T from_rational(const Rational& r) {
    if constexpr (std::is_same_v<T, Rational>) {
        return r;
    } else {
        return static_cast<T>(to_double(r));
    }
}
}  // namespace sim_detail

/// Relax-then-stream update for one scheme. Relaxation acts in particle
/// space through the precomputed exact operator f* = f + Q f + r.
template <class T>
class Stepper {
public:
    explicit Stepper(const LatticeScheme& s) : q_(s.q), dim_(s.d) {
        require_valid(s);
        const RationalMatrix minv = inverse_moment_matrix(s);
        const auto q = static_cast<std::size_t>(s.q);
        const auto nc = static_cast<std::size_t>(s.n_c);
        // Moment-space correction: [0; S (E M_W − M_Y)] f + [0; S offset].
        RationalMatrix corr(q, q, Rational(0));
        std::vector<Rational> r0(q, Rational(0));
        for (std::size_t k = 0; k < q - nc; ++k) {
            for (std::size_t j = 0; j < q; ++j) {
                Rational acc = -s.M(nc + k, j);
                for (std::size_t w = 0; w < nc; ++w) acc += s.E(k, w) * s.M(w, j);
                corr(nc + k, j) = s.rates[k] * acc;
            }
            r0[nc + k] = s.rates[k] * s.offset[k];
        }
        const RationalMatrix Q = minv * corr;
        const auto r = mat_vec(minv, r0);
        Q_.resize(q * q);
        r_.resize(q);
        for (std::size_t i = 0; i < q; ++i) {
            r_[i] = sim_detail::from_rational<T>(r[i]);
            for (std::size_t j = 0; j < q; ++j) Q_[i * q + j] = sim_detail::from_rational<T>(Q(i, j));
        }
        for (const auto& v : s.velocities) {
            std::array<int, kMaxDim> sh{};
            for (int a = 0; a < s.d; ++a) {
                const Rational& x = v[static_cast<std::size_t>(a)];
                if (x.get_den() != 1)
                    throw ValidationError("velocity not lattice-compatible: component " + to_string(x) + " is not an integer");
                sh[static_cast<std::size_t>(a)] = static_cast<int>(x.get_num().get_si());
            }
            shifts_.push_back(sh);
        }
    }

    void relax(Grid<T>& g) const {
        check(g);
        const auto q = static_cast<std::size_t>(q_);
        std::vector<T> in(q), out(q);
        for (std::size_t x = 0; x < g.sites(); ++x) {
            for (std::size_t j = 0; j < q; ++j) in[j] = g.f(static_cast<int>(j), x);
            for (std::size_t i = 0; i < q; ++i) {
                T acc = in[i] + r_[i];
                for (std::size_t j = 0; j < q; ++j) acc += Q_[i * q + j] * in[j];
                out[i] = acc;
            }
            for (std::size_t j = 0; j < q; ++j) g.f(static_cast<int>(j), x) = out[j];
        }
    }

    /// f_j(x) ← f_j(x − v_j); with `reverse`, f_j(x) ← f_j(x + v_j).
    void stream(Grid<T>& g, bool reverse = false) const {
        check(g);
        const auto& src = sources(g, reverse);
        std::vector<T> next(g.raw().size());
        const std::size_t n = g.sites();
        for (std::size_t j = 0; j < static_cast<std::size_t>(q_); ++j) {
            const T* from = g.raw().data() + j * n;
            T* to = next.data() + j * n;
            const std::size_t* idx = src.data() + j * n;
            for (std::size_t x = 0; x < n; ++x) to[x] = from[idx[x]];
        }
        g.raw().swap(next);
    }

    void step(Grid<T>& g) const {
        relax(g);
        stream(g);
    }

private:
    void check(const Grid<T>& g) const {
        if (g.q() != q_ || g.dim() != dim_) throw ValidationError("grid does not match the scheme");
    }

    /// Gather table: source site of every (velocity, site), cached per grid shape.
    const std::vector<std::size_t>& sources(const Grid<T>& g, bool reverse) const {
        auto& cache = reverse ? reverse_cache_ : forward_cache_;
        if (cache.sizes != g.sizes()) {
            cache.sizes = g.sizes();
            cache.table.resize(static_cast<std::size_t>(q_) * g.sites());
            for (int j = 0; j < q_; ++j) {
                const auto& sh = shifts_[static_cast<std::size_t>(j)];
                for (std::size_t x = 0; x < g.sites(); ++x) {
                    auto c = g.coords(x);
                    for (int a = 0; a < dim_; ++a) {
                        const auto au = static_cast<std::size_t>(a);
                        c[au] += reverse ? sh[au] : -sh[au];
                    }
                    cache.table[static_cast<std::size_t>(j) * g.sites() + x] = g.index(c);
                }
            }
        }
        return cache.table;
    }

    struct SourceCache {
        std::vector<int> sizes;
        std::vector<std::size_t> table;
    };
    mutable SourceCache forward_cache_;
    mutable SourceCache reverse_cache_;

    int q_;
    int dim_;
    std::vector<T> Q_;
    std::vector<T> r_;
    std::vector<std::array<int, kMaxDim>> shifts_;
};

/// Free function form of one relax-then-stream update.
template <class T>
void step(Grid<T>& g, const LatticeScheme& s) {
    Stepper<T>(s).step(g);
}

/// Moment field m(x) = M f(x) at one site.
template <class T>
std::vector<T> site_moments(const Grid<T>& g, const std::vector<std::vector<T>>& M, std::size_t x) {
    std::vector<T> m(M.size(), T(0));
    for (std::size_t i = 0; i < M.size(); ++i)
        for (std::size_t j = 0; j < M[i].size(); ++j) m[i] += M[i][j] * g.f(static_cast<int>(j), x);
    return m;
}

template <class T>
std::vector<std::vector<T>> convert_matrix(const RationalMatrix& m) {
    std::vector<std::vector<T>> out(m.rows(), std::vector<T>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = sim_detail::from_rational<T>(m(i, j));
    return out;
}

/// Σ_x W_w(x) for every conserved moment. Doubles use Neumaier summation.
template <class T>
std::vector<T> conserved_totals(const Grid<T>& g, const LatticeScheme& s) {
    const auto M = convert_matrix<T>(s.M);
    std::vector<T> total(static_cast<std::size_t>(s.n_c), T(0));
    std::vector<T> comp(total.size(), T(0));
    for (std::size_t x = 0; x < g.sites(); ++x)
        for (int w = 0; w < s.n_c; ++w) {
            T v(0);
            for (int j = 0; j < s.q; ++j) v += M[static_cast<std::size_t>(w)][static_cast<std::size_t>(j)] * g.f(j, x);
            const auto wu = static_cast<std::size_t>(w);
            if constexpr (std::is_floating_point_v<T>) {
                const T t = total[wu] + v;
                comp[wu] += std::abs(total[wu]) >= std::abs(v) ? (total[wu] - t) + v : (v - t) + total[wu];
                total[wu] = t;
            } else {
                total[wu] += v;
            }
        }
    for (std::size_t w = 0; w < total.size(); ++w) total[w] += comp[w];
    return total;
}

/// Fills every site from a moment vector function m(site).
template <class T, class F>
void set_moments(Grid<T>& g, const LatticeScheme& s, F&& moments_at) {
    const auto minv = convert_matrix<T>(inverse_moment_matrix(s));
    for (std::size_t x = 0; x < g.sites(); ++x) {
        const std::vector<T> m = moments_at(x);
        for (int j = 0; j < s.q; ++j) {
            T v(0);
            for (int i = 0; i < s.q; ++i) v += minv[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(i)];
            g.f(j, x) = v;
        }
    }
}

/// Phase θ(x) = 2π κ·x / n at a site.
inline double mode_phase(const Grid<double>& g, const std::vector<int>& kappa, std::size_t x) {
    const auto c = g.coords(x);
    double th = 0;
    for (int a = 0; a < g.dim(); ++a)
        th += 2 * std::numbers::pi * kappa[static_cast<std::size_t>(a)] * c[static_cast<std::size_t>(a)] /
              g.sizes()[static_cast<std::size_t>(a)];
    return th;
}

/// Physical wavevector of mode κ: k_α = 2π κ_α / (n_α λ).
inline std::vector<double> mode_wavevector(const LatticeScheme& s, const std::vector<int>& sizes, const std::vector<int>& kappa) {
    std::vector<double> k;
    for (int a = 0; a < s.d; ++a)
        k.push_back(2 * std::numbers::pi * kappa[static_cast<std::size_t>(a)] /
                    (sizes[static_cast<std::size_t>(a)] * to_double(s.lambda)));
    return k;
}

/// Fourier coefficient (1/N) Σ_x m(x) e^{−iθ(x)} of every moment.
inline Eigen::VectorXcd moment_mode(const Grid<double>& g, const LatticeScheme& s, const std::vector<int>& kappa) {
    const auto M = convert_matrix<double>(s.M);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s.q);
    for (std::size_t x = 0; x < g.sites(); ++x) {
        const auto m = site_moments(g, M, x);
        const std::complex<double> e = std::polar(1.0, -mode_phase(g, kappa, x));
        for (int i = 0; i < s.q; ++i) out(i) += m[static_cast<std::size_t>(i)] * e;
    }
    return out / static_cast<double>(g.sites());
}

struct MeasureOptions {
    int grid = 32;
    int steps = -1;                // -1: grid²/4
    std::vector<int> mode;         // default (1, 0, ...)
    double amplitude = 1e-4;
    int init_order = 0;            // 0: equilibrium start; j ≤ 3 adds S⁻¹ Σ_{i≤j} Ψ_i
    double fit_fraction = 0.8;     // fit over the last fraction of steps
    double max_fit_residual = 1e-6;
};

/// Measured versus predicted modal dynamics on one grid.
struct SimReport {
    int grid = 0;
    int steps = 0;
    std::vector<int> mode;
    std::vector<double> k;
    double measured_decay = 0;    // −d ln|A| / dt
    double measured_phase = 0;    // −d arg A / dt
    std::vector<double> predicted_decay;  // index j−1: through Γ_j
    std::vector<double> predicted_phase;
    std::vector<double> rel_err_decay;    // |measured − predicted| / |measured|
    double init_layer = 0;        // |ln|A(0)| − fitted intercept|
    double fit_residual = 0;      // rms of the ln|A| fit
    std::vector<double> log_amplitude;  // ln|A(t)|, t = 0..steps
};

namespace sim_detail {
/// Slope and intercept of the least-squares line through (t, y).
inline std::pair<double, double> line_fit(const std::vector<double>& t, const std::vector<double>& y, double* rms = nullptr) {
    const auto n = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double den = n * stt - st * st;
    const double slope = den != 0 ? (n * sty - st * sy) / den : 0.0;
    const double icpt = (sy - slope * st) / n;
    if (rms != nullptr) {
        double r = 0;
        for (std::size_t i = 0; i < t.size(); ++i) r += std::pow(y[i] - (icpt + slope * t[i]), 2);
        *rms = std::sqrt(r / n);
    }
    return {slope, icpt};
}
}  // namespace sim_detail

/// Runs one sinusoidal mode of the conserved moment and compares the fitted
/// decay and phase rates with the equivalent PDE at orders 1..4. Requires a
/// single conserved moment. Throws InstabilityError when the run diverges and
/// NumericError when the fit residual exceeds the threshold.
inline SimReport measure_mode(const LatticeScheme& s, const MeasureOptions& o) {
    require_valid(s);
    if (s.n_c != 1) throw ValidationError("mode measurement needs a single conserved moment");
    if (o.init_order < 0 || o.init_order > 3) throw ValidationError("init order must be between 0 and 3");
    SimReport rep;
    rep.grid = o.grid;
    rep.steps = o.steps >= 0 ? o.steps : o.grid * o.grid / 4;
    rep.mode = o.mode;
    if (rep.mode.empty()) {
        rep.mode.assign(static_cast<std::size_t>(s.d), 0);
        rep.mode[0] = 1;
    }
    if (static_cast<int>(rep.mode.size()) != s.d) throw ValidationError("mode needs one index per dimension");
    const std::vector<int> sizes(static_cast<std::size_t>(s.d), o.grid);
    rep.k = mode_wavevector(s, sizes, rep.mode);

    const ExpansionResult ex = expand(s, 4);
    // Predictions from −Σ_{j≤J} Γ_j(ik).
    std::complex<double> acc = 0;
    for (int j = 1; j <= 4; ++j) {
        const KSeries gj = to_kmatrix(ex.Gamma(j))(0, 0);
        for (const auto& [beta, c] : gj.terms()) {
            std::complex<double> v = -c.to_complex();
            for (int a = 0; a < s.d; ++a)
                v *= std::pow(rep.k[static_cast<std::size_t>(a)], beta.e[static_cast<std::size_t>(a)]);
            acc += v;
        }
        rep.predicted_decay.push_back(-acc.real());
        rep.predicted_phase.push_back(-acc.imag());
    }

    // Initial state: W = W0 + a sin θ, Y = Φ(W) (+ optional correction).
    Grid<double> g(s.d, sizes, s.q);
    const double W0 = to_double(s.base_state[0]);
    std::vector<std::complex<double>> corr(static_cast<std::size_t>(s.n_y()), 0.0);
    if (o.init_order > 0) {
        for (int j = 1; j <= o.init_order; ++j) {
            const auto pk = to_kmatrix(ex.Psi(j));
            for (int k = 0; k < s.n_y(); ++k)
                for (const auto& [beta, c] : pk(static_cast<std::size_t>(k), 0).terms()) {
                    std::complex<double> v = c.to_complex() / to_double(s.rates[static_cast<std::size_t>(k)]);
                    for (int a = 0; a < s.d; ++a)
                        v *= std::pow(rep.k[static_cast<std::size_t>(a)], beta.e[static_cast<std::size_t>(a)]);
                    corr[static_cast<std::size_t>(k)] += v;
                }
        }
    }
    set_moments(g, s, [&](std::size_t x) {
        const double th = mode_phase(g, rep.mode, x);
        const double w = W0 + o.amplitude * std::sin(th);
        const std::complex<double> e = std::polar(1.0, th);
        std::vector<double> m{w};
        for (int k = 0; k < s.n_y(); ++k) {
            const auto ku = static_cast<std::size_t>(k);
            m.push_back(to_double(s.E(ku, 0)) * w + to_double(s.offset[ku]) + o.amplitude * (corr[ku] * e).imag());
        }
        return m;
    });

    const Stepper<double> stepper(s);
    const auto M = convert_matrix<double>(s.M);
    std::vector<std::complex<double>> twiddle(g.sites());
    for (std::size_t x = 0; x < g.sites(); ++x) twiddle[x] = std::polar(1.0, -mode_phase(g, rep.mode, x));
    auto amplitude = [&]() {
        std::complex<double> a = 0;
        for (std::size_t x = 0; x < g.sites(); ++x) {
            double rho = 0;
            for (int j = 0; j < s.q; ++j) rho += M[0][static_cast<std::size_t>(j)] * g.f(j, x);
            a += rho * twiddle[x];
        }
        return a * (2.0 / static_cast<double>(g.sites()));
    };

    std::vector<std::complex<double>> amps{amplitude()};
    const double a0 = std::abs(amps.front());
    for (int t = 1; t <= rep.steps; ++t) {
        stepper.step(g);
        const auto a = amplitude();
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || std::abs(a) > 10 * a0)
            throw InstabilityError("instability detected at step " + std::to_string(t) + " on grid " + std::to_string(o.grid));
        amps.push_back(a);
    }
    for (const auto& a : amps) rep.log_amplitude.push_back(std::log(std::abs(a)));
    if (rep.steps < 2) return rep;

    // Unwrapped phase, then fits over the tail.
    std::vector<double> phase{std::arg(amps.front())};
    for (std::size_t t = 1; t < amps.size(); ++t) {
        double d = std::arg(amps[t]) - std::arg(amps[t - 1]);
        while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
        while (d < -std::numbers::pi) d += 2 * std::numbers::pi;
        phase.push_back(phase.back() + d);
    }
    const auto first = static_cast<std::size_t>(std::floor((1.0 - o.fit_fraction) * rep.steps));
    std::vector<double> ts, ya, yp;
    for (std::size_t t = first; t < amps.size(); ++t) {
        ts.push_back(static_cast<double>(t));
        ya.push_back(rep.log_amplitude[t]);
        yp.push_back(phase[t]);
    }
    double rms = 0;
    const auto [slope_a, icpt_a] = sim_detail::line_fit(ts, ya, &rms);
    const auto [slope_p, icpt_p] = sim_detail::line_fit(ts, yp);
    (void)icpt_p;
    rep.measured_decay = -slope_a;
    rep.measured_phase = -slope_p;
    rep.fit_residual = rms;
    rep.init_layer = std::abs(rep.log_amplitude.front() - icpt_a);
    for (double p : rep.predicted_decay)
        rep.rel_err_decay.push_back(std::abs(rep.measured_decay - p) / std::abs(rep.measured_decay));
    if (rms > o.max_fit_residual)
        throw NumericError("modal fit residual " + std::to_string(rms) + " above threshold; run is not a single decaying mode");
    return rep;
}

struct ConvergenceRow {
    int grid = 0;
    double measured = 0;
    double predicted_o2 = 0;
    double predicted_o4 = 0;
    double rel_err = 0;     // against the order-2 prediction
    double rel_err_o4 = 0;  // against the order-4 prediction
    std::optional<double> order_est;
    std::optional<double> order_est_o4;
};

/// Runs measure_mode on each grid and estimates orders from consecutive
/// error ratios, log₂(e_prev / e_cur) for doubling refinements.
inline std::vector<ConvergenceRow> convergence_study(const LatticeScheme& s, const std::vector<int>& grids, MeasureOptions o,
                                                     std::vector<SimReport>* reports = nullptr) {
    std::vector<ConvergenceRow> rows;
    for (std::size_t i = 0; i < grids.size(); ++i) {
        MeasureOptions oi = o;
        oi.grid = grids[i];
        const SimReport r = measure_mode(s, oi);
        ConvergenceRow row;
        row.grid = r.grid;
        row.measured = r.measured_decay;
        row.predicted_o2 = r.predicted_decay.at(1);
        row.predicted_o4 = r.predicted_decay.at(3);
        row.rel_err = r.rel_err_decay.at(1);
        row.rel_err_o4 = r.rel_err_decay.at(3);
        if (!rows.empty()) {
            const double ratio = static_cast<double>(grids[i]) / grids[i - 1];
            row.order_est = std::log(rows.back().rel_err / row.rel_err) / std::log(ratio);
            row.order_est_o4 = std::log(rows.back().rel_err_o4 / row.rel_err_o4) / std::log(ratio);
        }
        rows.push_back(row);
        if (reports != nullptr) reports->push_back(r);
    }
    return rows;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

inline const char* kConvergenceHeader = "grid,measured,predicted_o2,predicted_o4,rel_err,order_est";

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::string out = std::string(kConvergenceHeader) + "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.grid) + "," + format_double(r.measured) + "," + format_double(r.predicted_o2) + "," +
               format_double(r.predicted_o4) + "," + format_double(r.rel_err) + "," +
               (r.order_est ? format_double(*r.order_est) : std::string()) + "\n";
    }
    return out;
}

/// Whitespace-separated columns for gnuplot: grid, rel_err (order 2),
/// rel_err (order 4).
inline std::string convergence_gnuplot(const std::vector<ConvergenceRow>& rows) {
    std::string out = "# grid rel_err_o2 rel_err_o4\n";
    for (const auto& r : rows)
        out += std::to_string(r.grid) + " " + format_double(r.rel_err) + " " + format_double(r.rel_err_o4) + "\n";
    return out;
}

}  // namespace lbmeq
