#pragma once

// Scheme files use a small TOML subset:
//
//   file      := { line }
//   line      := [ statement ] [ "#" comment ] newline
//   statement := key "=" value | "[" key "]"
//   key       := [A-Za-z_][A-Za-z0-9_]*
//   value     := string | integer | array
//   string    := '"' { char | '\"' | '\\' } '"'
//   integer   := [ "+" | "-" ] digit { digit }
//   array     := "[" [ value { "," value } [ "," ] ] "]"     (may span lines)
//
// Rationals are written as quoted "p/q" strings or bare integers. Keys of the
// top-level table:
//
//   name                  string, optional
//   dimension             integer 1..3
//   lambda                rational, optional (default 1)
//   velocities            q arrays of d rationals, in units of lambda
//   moment_matrix         q arrays of q rationals
//   conserved             integer n_c
//   equilibrium_jacobian  (q-n_c) arrays of n_c rationals
//   equilibrium_offset    q-n_c rationals, optional (default 0)
//   rates                 q-n_c rationals
//   base_state            n_c rationals, optional (default 1, 0, ...)
//   moment_names          q strings, optional
//
// A trailing [parameters] table holds named rationals that are reported but
// not interpreted.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lbmeq/errors.hpp"
#include "lbmeq/scheme.hpp"

namespace lbmeq {

namespace scheme_io_detail {

struct Value {
    enum class Kind { String, Integer, Array } kind = Kind::String;
    std::string text;
    std::vector<Value> items;
    int line = 0;
};

struct Entry {
    Value value;
    int line = 0;
};

class Parser {
public:
    Parser(std::string source, std::string text) : source_(std::move(source)), text_(std::move(text)) {}

    /// table name ("" for top level) → key → entry.
    std::map<std::string, std::map<std::string, Entry>> parse() {
        std::map<std::string, std::map<std::string, Entry>> tables;
        std::string table;
        tables[table];
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            const char c = peek();
            if (c == '[') {
                const int l = line_;
                ++pos_;
                skip_spaces();
                table = key();
                skip_spaces();
                expect(']');
                if (tables.count(table) != 0) fail(l, "duplicate table [" + table + "]");
                tables[table];
                end_of_line();
                continue;
            }
            const int l = line_;
            const std::string k = key();
            skip_spaces();
            expect('=');
            skip_spaces();
            Value v = value();
            auto& tab = tables[table];
            if (tab.count(k) != 0) fail(l, "duplicate key '" + k + "'");
            tab[k] = Entry{std::move(v), l};
            end_of_line();
        }
        return tables;
    }

    [[noreturn]] void fail(int line, const std::string& what) const { throw ParseError(source_, line, what); }

    int last_line() const { return line_; }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return eof() ? '\0' : text_[pos_]; }

    void skip_spaces() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }

    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }

    void skip_blank_lines() {
        while (true) {
            skip_spaces();
            skip_comment();
            if (peek() == '\n') {
                ++pos_;
                ++line_;
                continue;
            }
            return;
        }
    }

    /// Whitespace, comments and newlines inside arrays.
    void skip_ws() {
        while (true) {
            skip_spaces();
            skip_comment();
            if (peek() != '\n') return;
            ++pos_;
            ++line_;
        }
    }

    void end_of_line() {
        skip_spaces();
        skip_comment();
        if (eof()) return;
        if (peek() != '\n') fail(line_, std::string("unexpected character '") + peek() + "'");
        ++pos_;
        ++line_;
    }

    void expect(char c) {
        if (peek() != c) {
            const std::string got = eof() ? "end of file" : (peek() == '\n' ? "end of line" : std::string("'") + peek() + "'");
            fail(line_, std::string("expected '") + c + "', found " + got);
        }
        ++pos_;
    }

    std::string key() {
        const char c = peek();
        if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail(line_, "expected a key");
        std::string out;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) out += text_[pos_++];
        return out;
    }

    Value value() {
        Value v;
        v.line = line_;
        const char c = peek();
        if (c == '"') {
            v.kind = Value::Kind::String;
            ++pos_;
            while (true) {
                if (eof() || peek() == '\n') fail(v.line, "unterminated string");
                char ch = text_[pos_++];
                if (ch == '"') break;
                if (ch == '\\') {
                    if (eof()) fail(v.line, "unterminated string");
                    ch = text_[pos_++];
                    if (ch != '"' && ch != '\\') fail(v.line, "unsupported escape sequence");
                }
                v.text += ch;
            }
        } else if (c == '[') {
            v.kind = Value::Kind::Array;
            ++pos_;
            skip_ws();
            while (peek() != ']') {
                if (eof()) fail(v.line, "unterminated array");
                v.items.push_back(value());
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_ws();
                } else if (peek() != ']') {
                    fail(line_, "expected ',' or ']' in array");
                }
            }
            ++pos_;
        } else if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            v.kind = Value::Kind::Integer;
            v.text += text_[pos_++];
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) v.text += text_[pos_++];
            if (!eof() && (peek() == '/' || peek() == '.'))
                fail(line_, "write non-integer numbers as quoted strings, e.g. \"1/2\"");
            if (v.text == "+" || v.text == "-") fail(v.line, "malformed integer");
        } else {
            fail(line_, eof() ? "expected a value, found end of file" : std::string("expected a value, found '") + c + "'");
        }
        return v;
    }

    std::string source_;
    std::string text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

class Reader {
public:
    Reader(const Parser& p, std::map<std::string, Entry> table, int eof_line)
        : p_(p), table_(std::move(table)), eof_line_(eof_line) {}

    bool has(const std::string& k) const { return table_.count(k) != 0; }

    const Entry& get(const std::string& k) {
        auto it = table_.find(k);
        if (it == table_.end()) p_.fail(eof_line_, "missing key '" + k + "'");
        used_.insert(k);
        return it->second;
    }

    void reject_unknown() const {
        for (const auto& [k, e] : table_)
            if (used_.count(k) == 0) p_.fail(e.line, "unknown key '" + k + "'");
    }

    Rational rational(const Value& v) const {
        if (v.kind == Value::Kind::Array) p_.fail(v.line, "expected a rational, found an array");
        try {
            return parse_rational(v.text);
        } catch (const std::invalid_argument& e) {
            p_.fail(v.line, e.what());
        }
    }

    long integer(const Value& v) const {
        if (v.kind != Value::Kind::Integer) p_.fail(v.line, "expected an integer");
        try {
            return std::stol(v.text);
        } catch (const std::exception&) {
            p_.fail(v.line, "integer out of range");
        }
    }

    std::string string(const Value& v) const {
        if (v.kind != Value::Kind::String) p_.fail(v.line, "expected a string");
        return v.text;
    }

    std::vector<Rational> vector(const Value& v, std::optional<std::size_t> n, const std::string& what) const {
        if (v.kind != Value::Kind::Array) p_.fail(v.line, what + " must be an array");
        if (n && v.items.size() != *n)
            p_.fail(v.line, what + " must have " + std::to_string(*n) + " entries, found " + std::to_string(v.items.size()));
        std::vector<Rational> out;
        for (const auto& it : v.items) out.push_back(rational(it));
        return out;
    }

    RationalMatrix matrix(const Value& v, std::size_t rows, std::size_t cols, const std::string& what) const {
        if (v.kind != Value::Kind::Array) p_.fail(v.line, what + " must be an array of rows");
        if (v.items.size() != rows)
            p_.fail(v.line, what + " must have " + std::to_string(rows) + " rows, found " + std::to_string(v.items.size()));
        RationalMatrix m(rows, cols, Rational(0));
        for (std::size_t i = 0; i < rows; ++i) {
            const auto row = vector(v.items[i], cols, what + " row " + std::to_string(i));
            for (std::size_t j = 0; j < cols; ++j) m(i, j) = row[j];
        }
        return m;
    }

private:
    const Parser& p_;
    std::map<std::string, Entry> table_;
    std::set<std::string> used_;
    int eof_line_;
};

}  // namespace scheme_io_detail

/// Parses scheme text; `source` names the input in error messages. Throws
/// ParseError (line-anchored) for syntax and shape errors and ValidationError
/// when the assembled scheme violates an invariant.
inline LatticeScheme parse_scheme(const std::string& text, const std::string& source = "<input>") {
    using namespace scheme_io_detail;
    Parser parser(source, text);
    auto tables = parser.parse();
    const int eof_line = parser.last_line();
    for (const auto& [name, t] : tables)
        if (name != "" && name != "parameters") {
            const int l = t.empty() ? eof_line : t.begin()->second.line;
            parser.fail(l, "unknown table [" + name + "]");
        }

    Reader r(parser, tables[""], eof_line);
    LatticeScheme s;
    s.name = r.has("name") ? r.string(r.get("name").value) : "";

    const auto& dim = r.get("dimension");
    const long d = r.integer(dim.value);
    if (d < 1 || d > 3) parser.fail(dim.line, "dimension must be 1, 2 or 3");
    s.d = static_cast<int>(d);
    if (r.has("lambda")) {
        const auto& e = r.get("lambda");
        s.lambda = r.rational(e.value);
        if (s.lambda <= 0) parser.fail(e.line, "lambda must be positive");
    }

    const auto& vel = r.get("velocities");
    if (vel.value.kind != Value::Kind::Array || vel.value.items.empty())
        parser.fail(vel.line, "velocities must be a non-empty array");
    s.q = static_cast<int>(vel.value.items.size());
    const auto q = static_cast<std::size_t>(s.q);
    for (std::size_t j = 0; j < q; ++j)
        s.velocities.push_back(r.vector(vel.value.items[j], static_cast<std::size_t>(s.d), "velocity " + std::to_string(j)));

    s.M = r.matrix(r.get("moment_matrix").value, q, q, "moment_matrix");

    const auto& cons = r.get("conserved");
    const long nc = r.integer(cons.value);
    if (nc < 1 || nc >= s.q) parser.fail(cons.line, "conserved must satisfy 1 <= conserved < " + std::to_string(s.q));
    s.n_c = static_cast<int>(nc);
    const auto ncu = static_cast<std::size_t>(nc);
    const auto ny = q - ncu;

    s.E = r.matrix(r.get("equilibrium_jacobian").value, ny, ncu, "equilibrium_jacobian");
    s.offset = r.has("equilibrium_offset") ? r.vector(r.get("equilibrium_offset").value, ny, "equilibrium_offset")
                                           : std::vector<Rational>(ny, Rational(0));
    s.rates = r.vector(r.get("rates").value, ny, "rates");
    if (r.has("base_state")) {
        s.base_state = r.vector(r.get("base_state").value, ncu, "base_state");
    } else {
        s.base_state.assign(ncu, Rational(0));
        s.base_state[0] = 1;
    }
    if (r.has("moment_names")) {
        const auto& e = r.get("moment_names");
        if (e.value.kind != Value::Kind::Array || e.value.items.size() != q)
            parser.fail(e.line, "moment_names must list " + std::to_string(q) + " names");
        for (const auto& it : e.value.items) s.moment_names.push_back(r.string(it));
    }
    r.reject_unknown();

    if (tables.count("parameters") != 0) {
        std::vector<std::pair<int, std::string>> order;
        for (const auto& [k, e] : tables["parameters"]) order.emplace_back(e.line, k);
        std::sort(order.begin(), order.end());
        for (const auto& [line, k] : order) s.parameters.emplace_back(k, r.rational(tables["parameters"].at(k).value));
    }

    require_valid(s);
    return s;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// "builtin:NAME" selects a built-in scheme, anything else is a file path.
inline LatticeScheme load_scheme(const std::string& source) {
    const std::string prefix = "builtin:";
    if (source.rfind(prefix, 0) == 0) return builtin_scheme(source.substr(prefix.size()));
    return parse_scheme(read_text_file(source), source);
}

namespace scheme_io_detail {
inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

inline std::string row(const std::vector<Rational>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + quote(to_string(v[i]));
    return out + "]";
}

inline std::string matrix_rows(const RationalMatrix& m) {
    std::string out = "[\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::vector<Rational> r;
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        out += "  " + row(r) + ",\n";
    }
    return out + "]";
}
}  // namespace scheme_io_detail

/// Serializes a scheme in the file format accepted by parse_scheme.
inline std::string write_scheme(const LatticeScheme& s) {
    using namespace scheme_io_detail;
    std::ostringstream o;
    if (!s.name.empty()) o << "name = " << quote(s.name) << "\n";
    o << "dimension = " << s.d << "\n";
    o << "lambda = " << quote(to_string(s.lambda)) << "\n";
    o << "velocities = [\n";
    for (const auto& v : s.velocities) o << "  " << row(v) << ",\n";
    o << "]\n";
    o << "moment_matrix = " << matrix_rows(s.M) << "\n";
    o << "conserved = " << s.n_c << "\n";
    o << "equilibrium_jacobian = " << matrix_rows(s.E) << "\n";
    o << "equilibrium_offset = " << row(s.offset) << "\n";
    o << "rates = " << row(s.rates) << "\n";
    o << "base_state = " << row(s.base_state) << "\n";
    if (!s.moment_names.empty()) {
        o << "moment_names = [";
        for (std::size_t i = 0; i < s.moment_names.size(); ++i) o << (i ? ", " : "") << quote(s.moment_names[i]);
        o << "]\n";
    }
    if (!s.parameters.empty()) {
        o << "\n[parameters]\n";
        for (const auto& [k, v] : s.parameters) o << k << " = " << quote(to_string(v)) << "\n";
    }
    return o.str();
}

}  // namespace lbmeq
