#include "qftscat/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qftscat {

namespace {

std::string path_of(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

const json& require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    return j;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(path_of(where, k) + ": unknown field");
}

std::vector<double> number_array(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number");
        v.push_back(j[i].get<double>());
    }
    return v;
}

FourVector vector_of(const json& j, int d, const std::string& where) {
    const auto v = number_array(j, where);
    if (static_cast<int>(v.size()) != d)
        throw ConfigError(where + ": expected " + std::to_string(d) + " components, got " + std::to_string(v.size()));
    return FourVector::from(v);
}

json vector_json(const FourVector& k) { return json(k.components()); }

} // namespace

double get_number(const json& j, const std::string& key, const std::string& where, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(path_of(where, key) + ": expected a number");
    return j[key].get<double>();
}

double require_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(path_of(where, key) + ": missing required field");
    return get_number(j, key, where, 0.0);
}

int get_int(const json& j, const std::string& key, const std::string& where, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ConfigError(path_of(where, key) + ": expected an integer");
    return j[key].get<int>();
}

cplx complex_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(where + ": expected a number or [re, im]");
}

json complex_to_json(cplx c) {
    if (c.imag() == 0.0) return c.real();
    return json::array({c.real(), c.imag()});
}

ModelParams model_from_json(const json& j, const std::string& where) {
    ModelParams p;
    if (j.is_null()) return p;
    require_object(j, where);
    reject_unknown(j, {"d", "m", "m0", "eps_phi"}, where);
    p.d = get_int(j, "d", where, p.d);
    p.m = get_number(j, "m", where, p.m);
    p.m0 = get_number(j, "m0", where, p.m);
    p.eps_phi = get_number(j, "eps_phi", where, p.eps_phi);
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return p;
}

json model_to_json(const ModelParams& p) { return {{"d", p.d}, {"m", p.m}, {"m0", p.m0}, {"eps_phi", p.eps_phi}}; }

QuadratureSettings quadrature_from_json(const json& j, const std::string& where) {
    QuadratureSettings q;
    if (j.is_null()) return q;
    require_object(j, where);
    reject_unknown(j, {"rel_tol", "max_depth", "box_widths", "scan_points", "fold_panels", "root_tol", "fail_tol"},
                   where);
    q.rel_tol = get_number(j, "rel_tol", where, q.rel_tol);
    const int depth = get_int(j, "max_depth", where, static_cast<int>(q.max_depth));
    if (depth <= 0) throw ConfigError(path_of(where, "max_depth") + ": must be positive");
    q.max_depth = static_cast<unsigned>(depth);
    q.box_widths = get_number(j, "box_widths", where, q.box_widths);
    q.scan_points = get_int(j, "scan_points", where, q.scan_points);
    q.fold_panels = get_int(j, "fold_panels", where, q.fold_panels);
    q.root_tol = get_number(j, "root_tol", where, q.root_tol);
    q.fail_tol = get_number(j, "fail_tol", where, q.fail_tol);
    return q;
}

json quadrature_to_json(const QuadratureSettings& q) {
    return {{"rel_tol", q.rel_tol},         {"max_depth", q.max_depth},     {"box_widths", q.box_widths},
            {"scan_points", q.scan_points}, {"fold_panels", q.fold_panels}, {"root_tol", q.root_tol},
            {"fail_tol", q.fail_tol}};
}

SpectralDensity spectral_from_json(const json& j, double m, const std::string& where) {
    if (j.is_null()) return SpectralDensity::none();
    require_object(j, where);
    if (!j.contains("name") || !j["name"].is_string()) throw ConfigError(path_of(where, "name") + ": missing string");
    const std::string name = j["name"].get<std::string>();
    if (name == "none") {
        reject_unknown(j, {"name"}, where);
        return SpectralDensity::none();
    }
    if (name == "standard") {
        reject_unknown(j, {"name", "c", "onset"}, where);
        return SpectralDensity::standard(m, get_number(j, "c", where, 0.1), get_number(j, "onset", where, 1.5));
    }
    if (name == "bump") {
        reject_unknown(j, {"name", "lo", "hi", "height"}, where);
        const double lo = require_number(j, "lo", where);
        const double hi = require_number(j, "hi", where);
        if (!(hi > lo)) throw ConfigError(where + ": bump needs lo < hi");
        return SpectralDensity::bump(lo, hi, get_number(j, "height", where, 1.0));
    }
    throw ConfigError(path_of(where, "name") + ": unknown spectral density '" + name + "'");
}

WavePacket packet_from_json(const json& j, int d, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"center", "width", "amplitude", "shift", "poly"}, where);
    if (!j.contains("center")) throw ConfigError(path_of(where, "center") + ": missing required field");
    WavePacket f(vector_of(j["center"], d, path_of(where, "center")), require_number(j, "width", where));
    if (!(f.width > 0.0)) throw ConfigError(path_of(where, "width") + ": must be positive");
    if (j.contains("amplitude")) f.amplitude = complex_from_json(j["amplitude"], path_of(where, "amplitude"));
    if (j.contains("shift")) f.shift = vector_of(j["shift"], d, path_of(where, "shift"));
    if (j.contains("poly")) {
        const json& p = j["poly"];
        const std::string pw = path_of(where, "poly");
        if (!p.is_array()) throw ConfigError(pw + ": expected an array of terms");
        std::vector<LegPolynomial::Term> terms;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const std::string tw = pw + "[" + std::to_string(i) + "]";
            require_object(p[i], tw);
            reject_unknown(p[i], {"exps", "coeff"}, tw);
            LegPolynomial::Term t;
            if (!p[i].contains("exps") || !p[i]["exps"].is_array() || static_cast<int>(p[i]["exps"].size()) != d)
                throw ConfigError(tw + ".exps: expected " + std::to_string(d) + " integers");
            for (int c = 0; c < d; ++c) {
                const json& e = p[i]["exps"][static_cast<std::size_t>(c)];
                if (!e.is_number_integer() || e.get<int>() < 0)
                    throw ConfigError(tw + ".exps: expected nonnegative integers");
                t.exps[static_cast<std::size_t>(c)] = e.get<int>();
            }
            t.coeff = p[i].contains("coeff") ? complex_from_json(p[i]["coeff"], tw + ".coeff") : cplx(1.0, 0.0);
            terms.push_back(t);
        }
        f.poly = LegPolynomial(terms);
    }
    return f;
}

json packet_to_json(const WavePacket& f) {
    json j{{"center", vector_json(f.center)}, {"width", f.width}, {"amplitude", complex_to_json(f.amplitude)}};
    if (f.shift) j["shift"] = vector_json(*f.shift);
    const auto& terms = f.poly.terms();
    const bool trivial = terms.size() == 1 && terms[0].coeff == cplx(1.0, 0.0) &&
                         std::all_of(terms[0].exps.begin(), terms[0].exps.end(), [](int e) { return e == 0; });
    if (!trivial) {
        json p = json::array();
        for (const auto& t : terms) {
            p.push_back({{"exps", std::vector<int>(t.exps.begin(), t.exps.begin() + f.dim())},
                         {"coeff", complex_to_json(t.coeff)}});
        }
        j["poly"] = p;
    }
    return j;
}

TransferPolynomial polynomial_from_json(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, {"n", "terms"}, where);
    const int n = get_int(j, "n", where, 0);
    if (n < 1) throw ConfigError(path_of(where, "n") + ": must be a positive integer");
    if (!j.contains("terms") || !j["terms"].is_array()) throw ConfigError(path_of(where, "terms") + ": expected an array");
    TransferPolynomial p(n);
    const json& terms = j["terms"];
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string tw = path_of(where, "terms") + "[" + std::to_string(t) + "]";
        require_object(terms[t], tw);
        reject_unknown(terms[t], {"degrees", "coeff"}, tw);
        TransferPolynomial::Exponents e(InvariantVector::size_for(n), 0);
        if (terms[t].contains("degrees")) {
            const json& deg = terms[t]["degrees"];
            require_object(deg, tw + ".degrees");
            for (const auto& [name, v] : deg.items()) {
                const auto ij = parse_invariant_name(name);
                if (!ij || ij->second >= n) throw ConfigError(tw + ".degrees." + name + ": not an invariant of " +
                                                              std::to_string(n) + " momenta");
                if (!v.is_number_integer() || v.get<int>() < 0)
                    throw ConfigError(tw + ".degrees." + name + ": expected a nonnegative integer");
                e[InvariantVector::index(ij->first, ij->second)] += v.get<int>();
            }
        }
        if (!terms[t].contains("coeff")) throw ConfigError(tw + ".coeff: missing required field");
        p.add_term(e, complex_from_json(terms[t]["coeff"], tw + ".coeff"));
    }
    return p;
}

json polynomial_to_json(const TransferPolynomial& p) {
    const int n = p.n();
    json terms = json::array();
    for (const auto& [e, c] : p.terms()) {
        json deg = json::object();
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= j; ++i) {
                const int x = e[InvariantVector::index(i, j)];
                if (x != 0) deg[invariant_name(i, j)] = x;
            }
        terms.push_back({{"degrees", deg}, {"coeff", complex_to_json(c)}});
    }
    return {{"n", n}, {"terms", terms}};
}

StructureEvaluator RunConfig::evaluator() const {
    StructureEvaluator ev(model, rho, quad);
    return ev;
}

const json& RunConfig::block(const std::string& name) const {
    static const json empty = json::object();
    if (!raw.contains(name)) return empty;
    return raw[name];
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    try {
        cfg.raw = json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is 1-based; convert to a line number for the diagnostic.
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(origin + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
    }
    if (!cfg.raw.is_object()) throw ConfigError(origin + ": top level must be an object");
    reject_unknown(cfg.raw,
                   {"model", "spectral", "quadrature", "seed", "threads", "amplitude", "converge", "fit", "gram",
                    "truncate_demo", "pvdemo"},
                   "");
    cfg.model = model_from_json(cfg.raw.value("model", json()), "model");
    cfg.rho = spectral_from_json(cfg.raw.value("spectral", json()), cfg.model.m, "spectral");
    cfg.quad = quadrature_from_json(cfg.raw.value("quadrature", json()), "quadrature");
    if (cfg.raw.contains("seed")) {
        if (!cfg.raw["seed"].is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
        cfg.seed = cfg.raw["seed"].get<std::uint64_t>();
    }
    const int threads = get_int(cfg.raw, "threads", "", 1);
    if (threads < 1) throw ConfigError("threads: must be positive");
    cfg.threads = static_cast<unsigned>(threads);
    try {
        cfg.evaluator().validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string config_hash(const json& j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace qftscat
