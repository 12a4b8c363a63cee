#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lbmeq/dispersion.hpp"
#include "lbmeq/expansion.hpp"
#include "lbmeq/json_io.hpp"
#include "lbmeq/render.hpp"
#include "lbmeq/scheme_io.hpp"
#include "lbmeq/simulator.hpp"

namespace lbmeq {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitMismatch = 3, kExitInstability = 4 };

struct RunConfig {
    std::string subcommand;
    std::string scheme;
    int order = 4;
    std::string format = "text";
    std::string output;
    // verify
    int perturb_gamma = 0;
    double tolerance = 1e-8;
    // simulate
    std::vector<int> grids{32, 64, 128};
    int steps = -1;
    std::vector<int> mode;
    double amplitude = 1e-4;
    int init_order = 0;
    std::string gnuplot;
};

namespace cli_detail {

class UsageError : public Error {
public:
    using Error::Error;
};

/// CE_EXPAND_DEGREE_CAP, if set.
inline int degree_cap_from_env() {
    const char* v = std::getenv("CE_EXPAND_DEGREE_CAP");
    if (v == nullptr || *v == '\0') return kDefaultDegreeCap;
    std::size_t used = 0;
    int cap = 0;
    try {
        cap = std::stoi(v, &used);
    } catch (const std::exception&) {
        throw UsageError(std::string("CE_EXPAND_DEGREE_CAP is not an integer: ") + v);
    }
    if (used != std::string(v).size()) throw UsageError(std::string("CE_EXPAND_DEGREE_CAP is not an integer: ") + v);
    if (cap < 1) throw UsageError("CE_EXPAND_DEGREE_CAP must be positive");
    if (cap > kDefaultDegreeCap)
        throw ValidationError("CE_EXPAND_DEGREE_CAP=" + std::to_string(cap) + " exceeds the supported maximum " +
                              std::to_string(kDefaultDegreeCap));
    return cap;
}

inline void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
    if (c.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + c.output);
    f << text;
}

inline LatticeScheme load(const RunConfig& c, std::ostream& err) {
    LatticeScheme s = load_scheme(c.scheme);
    for (const auto& w : validate(s).warnings) err << "warning: " << w << "\n";
    return s;
}

inline std::string beta_text(const MultiIndex& b, int dim) {
    std::string out = "(";
    for (int a = 0; a < dim; ++a) out += (a > 0 ? "," : "") + std::to_string(b.e[static_cast<std::size_t>(a)]);
    return out + ")";
}

/// Adds 1/1000 to the leading term of Γ_j(0,0) (or creates ∂x^j).
inline void perturb(ExpansionResult& r, int j) {
    if (j < 1 || j > r.order) throw UsageError("--perturb-gamma must be between 1 and the order");
    DiffPoly& p = r.gamma[static_cast<std::size_t>(j - 1)](0, 0);
    MultiIndex beta = MultiIndex::unit(0);
    for (int k = 1; k < j; ++k) beta = beta + MultiIndex::unit(0);
    if (!p.is_zero()) beta = p.terms().begin()->first;
    p.add_term(beta, make_rational(1, 1000));
}

inline int cmd_derive(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const int cap = degree_cap_from_env();
    const LatticeScheme s = load(c, err);
    const EquivalentPDE pde = assemble_pde(expand(s, c.order, cap), s);
    std::string text;
    if (c.format == "text")
        text = render_text(pde);
    else if (c.format == "latex")
        text = render_latex(pde);
    else
        text = to_json(pde).dump(2) + "\n";
    emit(c, text, out);
    return kExitOk;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const LatticeScheme s = load(c, err);
    ExpansionResult r = expand(s, kMaxOrder);
    if (c.perturb_gamma != 0) perturb(r, c.perturb_gamma);
    const KMatrix engine = engine_series(r);
    std::ostringstream rep;
    rep << "scheme: " << (s.name.empty() ? c.scheme : s.name) << "\n";
    bool ok = true;

    const AmplificationSeries amp = amplification_series(s);
    const KMatrix oracle = slow_log_matrix(amp);
    const SeriesComparison cmp = compare_series(oracle, engine, 1, kMaxOrder);
    if (cmp.match) {
        rep << "exact: PASS (" << cmp.compared_terms << " terms, residual 0)\n";
    } else {
        ok = false;
        const auto& m = *cmp.first_mismatch;
        rep << "exact: FAIL at entry (" << m.row << "," << m.col << ") beta " << beta_text(m.beta, s.d) << ": oracle "
            << to_string(m.expected) << ", engine " << to_string(m.actual) << "\n";
    }

    if (s.n_c > 1) {
        const NumericDispersion fit = slow_subspace_series_numeric(s);
        const double res = numeric_residual(engine, fit);
        const bool pass = res < c.tolerance;
        ok = ok && pass;
        rep << "numeric: " << (pass ? "PASS" : "FAIL") << " (residual " << format_double(res) << ", tolerance "
            << format_double(c.tolerance) << ", condition " << format_double(fit.condition_number) << ")\n";
    }
    rep << (ok ? "PASS" : "FAIL") << "\n";
    emit(c, rep.str(), out);
    return ok ? kExitOk : kExitMismatch;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const LatticeScheme s = load(c, err);
    if (c.steps == 0) {
        emit(c, std::string(kConvergenceHeader) + "\n", out);
        if (!c.gnuplot.empty()) std::ofstream(c.gnuplot, std::ios::binary) << "# grid rel_err_o2 rel_err_o4\n";
        return kExitOk;
    }
    MeasureOptions o;
    o.steps = c.steps;
    o.mode = c.mode;
    o.amplitude = c.amplitude;
    o.init_order = c.init_order;
    const auto rows = convergence_study(s, c.grids, o);
    emit(c, convergence_csv(rows), out);
    if (!c.gnuplot.empty()) {
        std::ofstream f(c.gnuplot, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + c.gnuplot);
        f << convergence_gnuplot(rows);
    }
    return kExitOk;
}

inline int cmd_schemes_list(std::ostream& out) {
    for (const auto& b : builtin_schemes()) out << "builtin:" << b.name << "  " << b.description << "\n";
    return kExitOk;
}

}  // namespace cli_detail

/// Runs the command line `args` (program name excluded). Returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    RunConfig c;
    CLI::App app{"Equivalent equations of lattice Boltzmann schemes", "lbmeq"};
    app.require_subcommand(1);

    auto* derive = app.add_subcommand("derive", "Print the equivalent PDE of a scheme");
    derive->add_option("--scheme", c.scheme, "Scheme file or builtin:NAME")->required();
    derive->add_option("--order", c.order, "Order in the time step (1-4)")->check(CLI::Range(1, kMaxOrder));
    derive->add_option("--format", c.format, "text, latex or json")->check(CLI::IsMember({"text", "latex", "json"}));
    derive->add_option("--output,-o", c.output, "Output file (default stdout)");

    auto* verify = app.add_subcommand("verify", "Compare the expansion with the dispersion oracle");
    verify->add_option("--scheme", c.scheme, "Scheme file or builtin:NAME")->required();
    verify->add_option("--tolerance", c.tolerance, "Residual bound for the numeric path");
    verify->add_option("--output,-o", c.output, "Output file (default stdout)");
    verify->add_option("--perturb-gamma", c.perturb_gamma)->group("");

    auto* simulate = app.add_subcommand("simulate", "Measure modal decay on a sequence of grids");
    simulate->add_option("--scheme", c.scheme, "Scheme file or builtin:NAME")->required();
    simulate->add_option("--grids", c.grids, "Grid sizes")->delimiter(',');
    simulate->add_option("--steps", c.steps, "Steps per grid (default n*n/4)")->check(CLI::NonNegativeNumber);
    simulate->add_option("--mode", c.mode, "Mode index per dimension")->delimiter(',');
    simulate->add_option("--amplitude", c.amplitude, "Initial amplitude");
    simulate->add_option("--init-order", c.init_order, "Non-equilibrium initialization order (0-3)")
        ->check(CLI::Range(0, 3));
    simulate->add_option("--output,-o", c.output, "CSV file (default stdout)");
    simulate->add_option("--gnuplot", c.gnuplot, "Also write a gnuplot data file");

    auto* schemes = app.add_subcommand("schemes", "Built-in schemes");
    schemes->require_subcommand(1);
    schemes->add_subcommand("list", "List built-in schemes");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (derive->parsed()) return cmd_derive(c, out, err);
        if (verify->parsed()) return cmd_verify(c, out, err);
        if (simulate->parsed()) return cmd_simulate(c, out, err);
        return cmd_schemes_list(out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InstabilityError& e) {
        err << "instability: " << e.what() << "\n";
        return kExitInstability;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitInstability;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace lbmeq
