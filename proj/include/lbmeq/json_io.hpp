#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "lbmeq/dispersion.hpp"
#include "lbmeq/expansion.hpp"

namespace lbmeq {

using Json = nlohmann::ordered_json;

namespace json_detail {
inline Json beta_json(const MultiIndex& b, int dim) { return Json(b.to_vector(dim)); }

inline MultiIndex beta_from(const Json& j) { return MultiIndex::from(j.get<std::vector<int>>()); }

inline Rational rational_from(const Json& j) {
    try {
        return parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
        throw ValidationError(std::string("bad rational in JSON: ") + e.what());
    }
}
}  // namespace json_detail

/// {"dim": d, "terms": [{"beta": [..], "coef": "p/q"}, ...]} in graded-lex order.
inline Json to_json(const DiffPoly& p, int dim) {
    Json terms = Json::array();
    for (const auto& [beta, c] : p.terms())
        terms.push_back(Json{{"beta", json_detail::beta_json(beta, dim)}, {"coef", to_string(c)}});
    return Json{{"dim", dim}, {"terms", terms}};
}

inline DiffPoly diffpoly_from_json(const Json& j) {
    const int dim = j.at("dim").get<int>();
    DiffPoly p(dim);
    for (const auto& t : j.at("terms")) p.add_term(json_detail::beta_from(t.at("beta")), json_detail::rational_from(t.at("coef")));
    return p;
}

/// {"rows": r, "cols": c, "entries": [[DiffPoly, ...], ...]}
inline Json to_json(const OpMatrix& m, int dim) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j), dim));
        rows.push_back(row);
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", rows}};
}

inline OpMatrix opmatrix_from_json(const Json& j) {
    const auto r = j.at("rows").get<std::size_t>();
    const auto c = j.at("cols").get<std::size_t>();
    OpMatrix m(r, c);
    const auto& e = j.at("entries");
    if (e.size() != r) throw ValidationError("operator matrix JSON: row count mismatch");
    for (std::size_t i = 0; i < r; ++i) {
        if (e[i].size() != c) throw ValidationError("operator matrix JSON: column count mismatch");
        for (std::size_t k = 0; k < c; ++k) m(i, k) = diffpoly_from_json(e[i][k]);
    }
    return m;
}

/// {"dim": d, "terms": [{"beta": [..], "re": "p/q", "im": "p/q"}, ...]}
inline Json to_json(const DispersionSeries& s) {
    Json terms = Json::array();
    for (const auto& [beta, c] : s.coef)
        terms.push_back(Json{{"beta", json_detail::beta_json(beta, s.dim)}, {"re", to_string(c.re)}, {"im", to_string(c.im)}});
    return Json{{"dim", s.dim}, {"terms", terms}};
}

inline DispersionSeries dispersion_from_json(const Json& j) {
    DispersionSeries s;
    s.dim = j.at("dim").get<int>();
    for (const auto& t : j.at("terms")) {
        ComplexRational c{json_detail::rational_from(t.at("re")), json_detail::rational_from(t.at("im"))};
        if (!c.is_zero()) s.coef[json_detail::beta_from(t.at("beta"))] = c;
    }
    return s;
}

inline Json to_json(const ExpansionResult& r) {
    Json g = Json::array();
    for (const auto& x : r.gamma) g.push_back(to_json(x, r.dim));
    Json p = Json::array();
    for (const auto& x : r.psi) p.push_back(to_json(x, r.dim));
    return Json{{"order", r.order}, {"dim", r.dim}, {"gamma", g}, {"psi", p}};
}

inline ExpansionResult expansion_from_json(const Json& j) {
    ExpansionResult r;
    r.order = j.at("order").get<int>();
    r.dim = j.at("dim").get<int>();
    for (const auto& x : j.at("gamma")) r.gamma.push_back(opmatrix_from_json(x));
    for (const auto& x : j.at("psi")) r.psi.push_back(opmatrix_from_json(x));
    return r;
}

/// Right-hand-side form: ∂t W[equation] = Σ coef · Δt^dt_order · ∂^beta W[variable].
inline Json to_json(const EquivalentPDE& pde) {
    Json terms = Json::array();
    for (const auto& t : pde.terms)
        terms.push_back(Json{{"equation", t.equation},
                             {"variable", t.variable},
                             {"dt_order", t.dt_order},
                             {"beta", json_detail::beta_json(t.beta, pde.dim)},
                             {"coef", to_string(t.coef)}});
    return Json{{"dim", pde.dim},
                {"order", pde.order},
                {"variables", pde.variables},
                {"form", "dt W[equation] = sum coef * Dt^dt_order * d^beta W[variable]"},
                {"terms", terms}};
}

inline EquivalentPDE pde_from_json(const Json& j) {
    EquivalentPDE pde;
    pde.dim = j.at("dim").get<int>();
    pde.order = j.at("order").get<int>();
    pde.variables = j.at("variables").get<std::vector<std::string>>();
    for (const auto& t : j.at("terms"))
        pde.terms.push_back({t.at("equation").get<int>(), t.at("variable").get<int>(), t.at("dt_order").get<int>(),
                             json_detail::beta_from(t.at("beta")), json_detail::rational_from(t.at("coef"))});
    return pde;
}

}  // namespace lbmeq
