#include "alch/scenario.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace alch {

namespace toml_lite {

namespace {

struct Cursor {
    const std::string& s;
    size_t i = 0;
    int line;
    const std::string& origin;

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << origin << ":" << line << ": " << msg;
        throw ScenarioError(os.str());
    }
    void skip_ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }
    bool done() const { return i >= s.size(); }
    char peek() const { return i < s.size() ? s[i] : '\0'; }
};

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
    Array arr;
    ++c.i;  // '['
    for (;;) {
        c.skip_ws();
        if (c.peek() == ']') {
            ++c.i;
            return arr;
        }
        arr.push_back(parse_value(c));
        c.skip_ws();
        if (c.peek() == ',') {
            ++c.i;
            continue;
        }
        if (c.peek() == ']') {
            ++c.i;
            return arr;
        }
        c.fail("expected ',' or ']' in array");
    }
}

Value parse_value(Cursor& c) {
    c.skip_ws();
    if (c.done()) c.fail("missing value");
    char ch = c.peek();
    if (ch == '"') {
        size_t end = c.s.find('"', c.i + 1);
        if (end == std::string::npos) c.fail("unterminated string");
        std::string v = c.s.substr(c.i + 1, end - c.i - 1);
        c.i = end + 1;
        return v;
    }
    if (ch == '[') return parse_array(c);
    size_t start = c.i;
    while (c.i < c.s.size() && c.s[c.i] != ',' && c.s[c.i] != ']' && c.s[c.i] != '#')
        ++c.i;
    std::string tok = c.s.substr(start, c.i - start);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok == "inf") return std::numeric_limits<double>::infinity();
    try {
        size_t used = 0;
        double d = std::stod(tok, &used);
        if (used != tok.size()) c.fail("trailing characters after number: '" + tok + "'");
        return d;
    } catch (const ScenarioError&) {
        throw;
    } catch (...) {
        c.fail("cannot parse value '" + tok + "'");
    }
}

}  // namespace

Document parse_string(const std::string& text, const std::string& origin) {
    Document doc;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        // strip comments outside strings
        std::string line;
        bool in_str = false;
        for (char ch : raw) {
            if (ch == '"') in_str = !in_str;
            if (ch == '#' && !in_str) break;
            line.push_back(ch);
        }
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ScenarioError(origin + ":" + std::to_string(lineno) +
                                    ": malformed section header");
            section = line.substr(1, line.size() - 2);
            doc[section];
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ScenarioError(origin + ":" + std::to_string(lineno) +
                                ": expected 'key = value'");
        std::string key = line.substr(0, eq);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        if (key.empty())
            throw ScenarioError(origin + ":" + std::to_string(lineno) + ": empty key");
        std::string rhs = line.substr(eq + 1);
        Cursor c{rhs, 0, lineno, origin};
        Value v = parse_value(c);
        c.skip_ws();
        if (!c.done())
            c.fail("unexpected trailing content");
        doc[section][key] = std::move(v);
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_string(os.str(), path);
}

}  // namespace toml_lite

namespace {

using toml_lite::Table;
using toml_lite::Value;

const Table* find_table(const toml_lite::Document& doc, const std::string& name) {
    auto it = doc.find(name);
    return it == doc.end() ? nullptr : &it->second;
}

template <typename T>
std::optional<T> get_opt(const Table* t, const std::string& key) {
    if (!t) return {};
    auto it = t->find(key);
    if (it == t->end()) return {};
    if (!std::holds_alternative<T>(it->second))
        throw ScenarioError("field '" + key + "' has the wrong type");
    return std::get<T>(it->second);
}

Mat matrix_from_array(const toml_lite::Array& rows, const std::string& key) {
    int m = static_cast<int>(rows.size());
    if (m == 0) throw ScenarioError("field '" + key + "': empty matrix");
    Mat out(m, m);
    for (int i = 0; i < m; ++i) {
        if (!std::holds_alternative<toml_lite::Array>(rows[i]))
            throw ScenarioError("field '" + key + "': expected nested arrays");
        const auto& row = std::get<toml_lite::Array>(rows[i]);
        if (static_cast<int>(row.size()) != m)
            throw ScenarioError("field '" + key + "': matrix must be square");
        for (int j = 0; j < m; ++j) {
            if (!std::holds_alternative<double>(row[j]))
                throw ScenarioError("field '" + key + "': non-numeric entry");
            out(i, j) = std::get<double>(row[j]);
        }
    }
    return out;
}

}  // namespace

Mat Scenario::initial_shape_operator() const {
    const int m = 2 * n + 1;
    if (explicit_S0) {
        if (explicit_S0->rows() != m)
            throw ScenarioError("initial shape operator has the wrong dimension");
        return *explicit_S0;
    }
    double r0 = sphere_radius;
    Mat s = Mat::Identity(m, m) * (0.5 / std::tanh(0.5 * r0));
    s(0, 0) = 1.0 / std::tanh(r0);
    return s;
}

Mat Scenario::initial_basis() const {
    const int m = 2 * n + 1;
    if (explicit_basis) {
        if (explicit_basis->rows() != m)
            throw ScenarioError("initial basis has the wrong dimension");
        auto info = rank_and_cond(*explicit_basis);
        if (info.rank < m)
            throw ScenarioError("initial basis is rank deficient (repeated vector?)");
        return *explicit_basis;
    }
    return Mat::Identity(m, m);
}

CurvatureProfile Scenario::make_profile() const {
    switch (kind) {
        case ScenarioKind::Model:
            return model_profile(n);
        case ScenarioKind::Random:
            return random_profile(n, a, C0, b, C1, seed);
        case ScenarioKind::Warped: {
            WarpSpec w;
            double r0a = warp_r0_a, ea = warp_eps_a, ka = warp_k_a;
            double r0b = warp_r0_b, eb = warp_eps_b, kb = warp_k_b;
            w.A = [r0a, ea, ka](double r) {
                return std::sinh(r + r0a) * (1.0 + ea * std::exp(-ka * r));
            };
            w.B = [r0b, eb, kb](double r) {
                return std::sinh(0.5 * (r + r0b)) * (1.0 + eb * std::exp(-kb * r));
            };
            return warped_profile(n, w, a, C0, b, C1);
        }
    }
    throw ScenarioError("unknown scenario kind");
}

Scenario scenario_from_document(const toml_lite::Document& doc) {
    Scenario sc;
    const Table* scn = find_table(doc, "scenario");
    if (!scn) throw ScenarioError("missing [scenario] section");

    auto kind = get_opt<std::string>(scn, "kind").value_or("model");
    if (kind == "model")
        sc.kind = ScenarioKind::Model;
    else if (kind == "random")
        sc.kind = ScenarioKind::Random;
    else if (kind == "warped")
        sc.kind = ScenarioKind::Warped;
    else
        throw ScenarioError("[scenario] kind must be model, random, or warped");

    sc.n = static_cast<int>(get_opt<double>(scn, "n").value_or(1.0));
    if (sc.n < 1) throw ScenarioError("[scenario] n must be >= 1");
    sc.seed = static_cast<std::uint64_t>(get_opt<double>(scn, "seed").value_or(1.0));
    sc.extract = get_opt<bool>(scn, "extract").value_or(true);

    if (const Table* dec = find_table(doc, "decay")) {
        sc.a = get_opt<double>(dec, "a").value_or(sc.a);
        sc.C0 = get_opt<double>(dec, "C0").value_or(sc.C0);
        sc.b = get_opt<double>(dec, "b").value_or(sc.b);
        sc.C1 = get_opt<double>(dec, "C1").value_or(sc.C1);
    }
    if (sc.kind != ScenarioKind::Model && !std::isfinite(sc.a))
        throw ScenarioError("[decay] a is required for non-model scenarios");

    if (const Table* integ = find_table(doc, "integration")) {
        sc.r_max = get_opt<double>(integ, "r_max").value_or(sc.r_max);
        sc.tol = get_opt<double>(integ, "tol").value_or(sc.tol);
        sc.grid_points =
            static_cast<int>(get_opt<double>(integ, "grid").value_or(sc.grid_points));
    }
    if (!(sc.r_max > 0.0)) throw ScenarioError("[integration] r_max must be positive");
    if (!(sc.tol > 0.0)) throw ScenarioError("[integration] tol must be positive");
    if (sc.grid_points < 16) throw ScenarioError("[integration] grid must be >= 16");

    if (const Table* init = find_table(doc, "initial")) {
        if (auto s = get_opt<std::string>(init, "shape_operator")) {
            if (s->rfind("model_sphere(", 0) == 0 && s->back() == ')') {
                sc.sphere_radius = std::stod(s->substr(13, s->size() - 14));
                if (!(sc.sphere_radius > 0.0))
                    throw ScenarioError("[initial] model_sphere radius must be positive");
            } else {
                throw ScenarioError("[initial] shape_operator: expected model_sphere(r0)");
            }
        } else if (auto arr = get_opt<toml_lite::Array>(init, "shape_operator")) {
            Mat s0 = matrix_from_array(*arr, "shape_operator");
            if ((s0 - s0.transpose()).norm() > 1e-12 * std::max(1.0, s0.norm()))
                throw ScenarioError("[initial] shape_operator must be symmetric");
            if (min_eigenvalue(sym_part(s0)) < -1e-12)
                throw ScenarioError("[initial] shape_operator must be positive semi-definite");
            sc.explicit_S0 = s0;
        }
        if (auto basis = get_opt<std::string>(init, "basis")) {
            if (*basis != "standard")
                throw ScenarioError("[initial] basis: expected \"standard\" or a matrix");
        } else if (auto arr = get_opt<toml_lite::Array>(init, "basis")) {
            sc.explicit_basis = matrix_from_array(*arr, "basis");
        }
    }

    if (const Table* out = find_table(doc, "output")) {
        sc.out_dir = get_opt<std::string>(out, "dir").value_or(sc.out_dir);
        if (auto arr = get_opt<toml_lite::Array>(out, "series")) {
            for (const auto& v : *arr) {
                if (!std::holds_alternative<std::string>(v))
                    throw ScenarioError("[output] series must be a list of names");
                sc.series.push_back(std::get<std::string>(v));
            }
        }
    }

    if (const Table* ver = find_table(doc, "verification")) {
        sc.epsilon = get_opt<double>(ver, "epsilon").value_or(sc.epsilon);
        if (auto c = get_opt<double>(ver, "c0_override")) sc.c0_check_override = *c;
    }
    if (!(sc.epsilon > 0.0) || !(sc.epsilon < sc.n + 0.5))
        throw ScenarioError("[verification] epsilon must lie in (0, n + 1/2)");

    if (const Table* warp = find_table(doc, "warp")) {
        sc.warp_r0_a = get_opt<double>(warp, "r0_a").value_or(sc.warp_r0_a);
        sc.warp_eps_a = get_opt<double>(warp, "eps_a").value_or(sc.warp_eps_a);
        sc.warp_k_a = get_opt<double>(warp, "k_a").value_or(sc.warp_k_a);
        sc.warp_r0_b = get_opt<double>(warp, "r0_b").value_or(sc.warp_r0_b);
        sc.warp_eps_b = get_opt<double>(warp, "eps_b").value_or(sc.warp_eps_b);
        sc.warp_k_b = get_opt<double>(warp, "k_b").value_or(sc.warp_k_b);
    }

    // Hypothesis gates. Component limits need decay order a > 1/2; the
    // coframe rank conclusion needs a > 1 (and no conclusion at a = 1).
    if (sc.extract && !(sc.a > 0.5))
        throw ScenarioError(
            "extraction requires decay order a > 1/2; got a = " + std::to_string(sc.a));
    if (sc.extract && sc.a <= 1.0)
        sc.warnings.push_back(
            "coframe rank conclusion requires decay order a > 1; rank check carries no "
            "theorem at a = " + std::to_string(sc.a));

    // Fail early on malformed defaults.
    sc.initial_shape_operator();
    sc.initial_basis();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    return scenario_from_document(toml_lite::parse_file(path));
}

}  // namespace alch
