#include "qftscat/cli.hpp"

#include "qftscat/fitter.hpp"
#include "qftscat/formfactor.hpp"
#include "qftscat/gns.hpp"
#include "qftscat/lszlab.hpp"
#include "qftscat/truncation.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

namespace qftscat {

namespace {

namespace fs = std::filesystem;

json stamp(const std::string& command, const RunConfig& cfg) {
    return {{"command", command}, {"version", kVersion}, {"config_hash", config_hash(cfg.raw)}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path.string() + ": cannot write");
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<WavePacket> packets_of(const json& block, const std::string& key, int d) {
    std::vector<WavePacket> out;
    if (!block.contains(key)) return out;
    const json& arr = block[key];
    if (!arr.is_array()) throw ConfigError(key + ": expected an array of packets");
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(packet_from_json(arr[i], d, key + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> t_grid_of(const json& block, const std::string& where) {
    if (!block.contains("t_grid")) return default_t_grid();
    const json& g = block["t_grid"];
    if (g.is_array()) {
        std::vector<double> t;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g[i].is_number()) throw ConfigError(where + ".t_grid[" + std::to_string(i) + "]: expected a number");
            t.push_back(g[i].get<double>());
        }
        if (t.size() < 2) throw ConfigError(where + ".t_grid: needs at least two times");
        return t;
    }
    const std::string w = where + ".t_grid";
    if (!g.is_object()) throw ConfigError(w + ": expected an array or {points, lo, hi}");
    const int points = get_int(g, "points", w, 32);
    const double lo = get_number(g, "lo", w, 1.0);
    const double hi = get_number(g, "hi", w, 1e3);
    if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw ConfigError(w + ": needs points >= 2 and 0 < lo < hi");
    return default_t_grid(points, lo, hi);
}

std::optional<TransferFamily> family_of(const json& block, const std::string& where) {
    if (!block.contains("transfer")) return std::nullopt;
    TransferFamily fam;
    fam.members[2] = TransferPolynomial::constant(2, 1.0);
    const json& t = block["transfer"];
    auto add = [&](const json& p, const std::string& w) {
        auto poly = polynomial_from_json(p, w);
        fam.members[poly.n()] = poly;
    };
    if (t.is_array()) {
        for (std::size_t i = 0; i < t.size(); ++i) add(t[i], where + ".transfer[" + std::to_string(i) + "]");
    } else {
        add(t, where + ".transfer");
    }
    const auto v = validate_transfer_family(fam);
    if (!v.pass) {
        throw ConfigError(where + ".transfer: violates " + v.violations.front().clause + ": " +
                          v.violations.front().message);
    }
    return fam;
}

bool close_rel(cplx a, cplx b, double tol) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tol * scale || scale < 1e-300;
}

std::string convergence_csv(const ConvergenceReport& r) {
    std::string s = "t,value_re,value_im,window_avg_re,window_avg_im,abs_err\n";
    for (std::size_t i = 0; i < r.t_grid.size(); ++i) {
        s += num(r.t_grid[i]) + "," + num(r.values[i].real()) + "," + num(r.values[i].imag()) + "," +
             num(r.window_averaged[i].real()) + "," + num(r.window_averaged[i].imag()) + "," + num(r.errors[i]) + "\n";
    }
    return s;
}

json report_json(const ConvergenceReport& r) {
    json j{{"extrapolated_limit", complex_to_json(r.extrapolated_limit)},
           {"limit_uncertainty", r.limit_uncertainty},
           {"rate", {{"C", r.fit_C}, {"alpha", r.fit_alpha}, {"valid", r.fit_valid}}},
           {"oscillation_amplitude", r.oscillation_amplitude},
           {"final_relative_error", r.final_relative_error},
           {"envelope_ok", r.envelope_ok},
           {"status", r.status}};
    if (r.target) j["target"] = complex_to_json(*r.target);
    return j;
}

int cmd_amplitude(const RunConfig& cfg, const fs::path& out) {
    const json& b = cfg.block("amplitude");
    const int d = cfg.model.d;
    AmplitudeRequest req;
    req.in_packets = packets_of(b, "in", d);
    req.out_packets = packets_of(b, "out", d);
    req.r = static_cast<int>(req.in_packets.size());
    req.n = req.r + static_cast<int>(req.out_packets.size());
    req.validate(d);
    FormFactorEvaluator ev{cfg.evaluator(), family_of(b, "amplitude")};
    const bool check = b.value("refinement_check", true);
    const double tol = get_number(b, "tolerance", "amplitude", 5e-3);

    spdlog::info("amplitude: n={} r={}", req.n, req.r);
    const Estimate e = smatrix_amplitude(req, ev);
    json j = stamp("amplitude", cfg);
    j["n"] = req.n;
    j["r"] = req.r;
    j["value_re"] = e.value.real();
    j["value_im"] = e.value.imag();
    j["est_error"] = e.error;
    bool pass = std::isfinite(e.value.real()) && std::isfinite(e.value.imag());
    if (check) {
        const Estimate r = smatrix_amplitude(req, ev.refined());
        const bool ok = close_rel(e.value, r.value, tol);
        j["refined"] = {{"value_re", r.value.real()}, {"value_im", r.value.imag()}, {"agrees", ok}};
        pass = pass && ok;
    }
    j["pass"] = pass;
    write_json(out / "amplitude.json", j);
    return pass ? kExitPass : kExitNumerical;
}

int cmd_converge(const RunConfig& cfg, const fs::path& out) {
    const json& b = cfg.block("converge");
    const int d = cfg.model.d;
    FiniteTimeSetup setup;
    setup.f.legs = packets_of(b, "packets", d);
    if (!b.contains("labels") || !b["labels"].is_array()) throw ConfigError("converge.labels: expected an array");
    for (const auto& l : b["labels"]) {
        if (!l.is_string()) throw ConfigError("converge.labels: expected strings in, loc or out");
        try {
            setup.labels.push_back(parse_leg_label(l.get<std::string>()));
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("converge.labels: ") + e.what());
        }
    }
    setup.ev = FormFactorEvaluator{cfg.evaluator(), family_of(b, "converge")};
    try {
        setup.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("converge: ") + e.what());
    }
    const auto grid = t_grid_of(b, "converge");
    const double ratio = get_number(b, "ratio", "converge", 0.5);
    const int n = static_cast<int>(setup.f.size());
    std::vector<MultiTimeSchedule> orderings;
    const json names = b.value("orderings", json::array({"identity", "reversed"}));
    for (const auto& o : names) {
        const std::string s = o.is_string() ? o.get<std::string>() : "";
        if (s == "identity") {
            orderings.push_back(MultiTimeSchedule::identity(n, ratio));
        } else if (s == "reversed") {
            orderings.push_back(MultiTimeSchedule::reversed(n, ratio));
        } else {
            throw ConfigError("converge.orderings: expected \"identity\" or \"reversed\"");
        }
    }
    const double tol = get_number(b, "tolerance", "converge", 1e-2);
    std::optional<cplx> target;
    const std::string tmode = b.value("target", "direct");
    if (tmode == "direct") {
        spdlog::info("converge: direct amplitude for the reference value");
        const Estimate e = setup.ev.transfer ? eval_F_n(setup.labels, setup.f, setup.ev)
                                             : eval_FG_n(setup.labels, setup.f, setup.ev);
        target = e.value;
    } else if (tmode != "none") {
        throw ConfigError("converge.target: expected \"direct\" or \"none\"");
    }
    spdlog::info("converge: {} legs, {} times, {} orderings", n, grid.size(), orderings.size());
    const auto study = convergence_study(setup, grid, orderings, target);

    bool pass = study.ordering_independent;
    json reports = json::array();
    for (std::size_t k = 0; k < study.reports.size(); ++k) {
        const auto& r = study.reports[k];
        pass = pass && r.envelope_ok && (!target || r.final_relative_error <= tol);
        reports.push_back(report_json(r));
        const std::string name = k == 0 ? "converge.csv" : "converge_ordering" + std::to_string(k) + ".csv";
        write_text(out / name, convergence_csv(r));
    }
    json j = stamp("converge", cfg);
    j["orderings"] = names;
    j["reports"] = reports;
    j["limit"] = complex_to_json(study.limit);
    j["spread"] = study.spread;
    j["uncertainty"] = study.uncertainty;
    j["ordering_independent"] = study.ordering_independent;
    j["analytic_limit"] = complex_to_json(study.analytic_limit);
    if (target) j["target"] = complex_to_json(*target);
    j["tolerance"] = tol;
    j["pass"] = pass;
    write_json(out / "converge.json", j);
    return pass ? kExitPass : kExitNumerical;
}

int cmd_fit(const RunConfig& cfg, const fs::path& out) {
    const json& b = cfg.block("fit");
    const std::string w = "fit";
    FitConfig fc;
    fc.E_max = get_number(b, "E_max", w, 10.0 * cfg.model.m);
    fc.epsilon = get_number(b, "epsilon", w, fc.epsilon);
    fc.max_degree = get_int(b, "max_degree", w, fc.max_degree);
    fc.train_count = get_int(b, "train_count", w, fc.train_count);
    fc.validate_count = get_int(b, "validate_count", w, fc.validate_count);
    fc.seed = cfg.seed;
    fc.threads = cfg.threads;
    try {
        fc.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    const int n = get_int(b, "n", w, 4);
    const int r = get_int(b, "r", w, n / 2);
    const int L_max = get_int(b, "L_max", w, 2 * fc.max_degree);
    if (n < 3) throw ConfigError("fit.n: must be >= 3");

    json j = stamp("fit", cfg);
    j["n"] = n;
    j["r"] = r;
    j["E_max"] = fc.E_max;
    j["epsilon"] = fc.epsilon;
    FitData data;
    if (!b.contains("reference")) throw ConfigError("fit.reference: missing required field");
    const json& ref = b["reference"];
    if (ref.is_object() && ref.contains("table")) {
        if (!ref["table"].is_string()) throw ConfigError("fit.reference.table: expected a path");
        data = load_table(ref["table"].get<std::string>(), n, fc, cfg.model.m);
        j["reference"] = {{"table", ref["table"]}};
    } else {
        if (!ref.is_object() || !ref.contains("name") || !ref["name"].is_string())
            throw ConfigError("fit.reference: expected {\"name\": ...} or {\"table\": path}");
        ReferenceParams rp;
        rp.value = get_number(ref, "value", "fit.reference", rp.value);
        rp.scale = get_number(ref, "scale", "fit.reference", rp.scale);
        ReferenceFunction R;
        try {
            R = make_reference(ref["name"].get<std::string>(), n, rp, cfg.model.m);
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("fit.reference: ") + e.what());
        }
        spdlog::info("fit: sampling Q_{} with {} incoming legs", n, r);
        const auto sample = sample_Qn(n, r, fc, cfg.model);
        j["reference"] = ref;
        j["sample"] = {{"attempts", sample.attempts},
                       {"points", sample.points.size()},
                       {"diagnostics", sample.diagnostics}};
        if (sample.points.empty()) {
            j["pass"] = false;
            j["message"] = "empty sample: " + sample.diagnostics;
            write_json(out / "fit.json", j);
            return kExitNumerical;
        }
        double worst = 0.0;
        for (const auto& p : sample.points) worst = std::max(worst, qn_constraint_residual(p, r, fc.E_max, cfg.model.m));
        j["sample"]["max_constraint_residual"] = worst;
        if (!(worst <= 1e-10)) throw NumericalError("fit: sampled point violates the constraints by " + num(worst));
        data = make_fit_data(R, sample, fc);
    }
    spdlog::info("fit: {} training / {} validation points", data.train.size(), data.validate.size());
    const FitReport rep = fit_polynomial(data, fc);
    json hist = json::array();
    for (auto [deg, err] : rep.history) hist.push_back({{"degree", deg}, {"validation_sup_error", err}});
    j["report"] = {{"achieved_sup_error", rep.achieved_sup_error},
                   {"train_sup_error", rep.train_sup_error},
                   {"degree_used", rep.degree_used},
                   {"train_count", rep.train_count},
                   {"validate_count", rep.validate_count},
                   {"basis_size", rep.basis_size},
                   {"rank", rep.rank},
                   {"history", hist},
                   {"message", rep.message}};
    bool pass = rep.pass;
    if (pass) {
        try {
            const auto fam = build_family({{n, rep}}, L_max);
            const bool herm = hermiticity_identity_check(fam.member(n), 100, fc.seed, cfg.model.d);
            j["family"] = {{"L_max", L_max}, {"admissible", true}, {"hermiticity_identity", herm}};
            pass = herm;
        } catch (const std::exception& e) {
            j["family"] = {{"L_max", L_max}, {"admissible", false}, {"error", e.what()}};
            pass = false;
        }
    }
    j["pass"] = pass;
    write_json(out / "fit.json", j);
    write_json(out / "fit_polynomial.json", polynomial_to_json(rep.polynomial));
    return pass ? kExitPass : kExitNumerical;
}

BorchersVector member_of(const json& m, int d, const std::string& where) {
    if (m.is_array()) {
        PacketProduct p;
        for (std::size_t i = 0; i < m.size(); ++i)
            p.legs.push_back(packet_from_json(m[i], d, where + "[" + std::to_string(i) + "]"));
        return BorchersVector::of(p);
    }
    if (!m.is_object()) throw ConfigError(where + ": expected an array of packets or {scalar, terms}");
    BorchersVector v;
    if (m.contains("scalar")) v.scalar = complex_from_json(m["scalar"], where + ".scalar");
    if (m.contains("terms")) {
        const json& t = m["terms"];
        if (!t.is_array()) throw ConfigError(where + ".terms: expected an array");
        for (std::size_t i = 0; i < t.size(); ++i) {
            const std::string tw = where + ".terms[" + std::to_string(i) + "]";
            if (!t[i].is_object() || !t[i].contains("packets") || !t[i]["packets"].is_array())
                throw ConfigError(tw + ": expected {coeff, packets}");
            BorchersTerm term;
            if (t[i].contains("coeff")) term.coeff = complex_from_json(t[i]["coeff"], tw + ".coeff");
            const json& ps = t[i]["packets"];
            for (std::size_t k = 0; k < ps.size(); ++k)
                term.packets.legs.push_back(packet_from_json(ps[k], d, tw + ".packets[" + std::to_string(k) + "]"));
            v.add(term);
        }
    }
    return v;
}

int cmd_gram(const RunConfig& cfg, const fs::path& out) {
    const json& b = cfg.block("gram");
    const int d = cfg.model.d;
    if (!b.contains("family") || !b["family"].is_array() || b["family"].empty())
        throw ConfigError("gram.family: expected a nonempty array");
    std::vector<BorchersVector> family;
    for (std::size_t i = 0; i < b["family"].size(); ++i)
        family.push_back(member_of(b["family"][i], d, "gram.family[" + std::to_string(i) + "]"));
    const std::string kind = b.value("functional", "in");
    const int K = get_int(b, "K", "gram", 2);
    const int L = get_int(b, "L", "gram", 2);
    const int max_order = get_int(b, "max_order", "gram", 4);
    FormFactorEvaluator ev{cfg.evaluator(), family_of(b, "gram")};
    PairingFunctional w;
    if (kind == "structure") {
        w = structure_functional(ev.structure);
    } else if (kind == "in" || kind == "out" || kind == "loc") {
        w = formfactor_functional(ev, parse_leg_label(kind));
    } else {
        throw ConfigError("gram.functional: expected in, out, loc or structure");
    }
    w.max_order = max_order;
    spdlog::info("gram: {} functional, {} vectors", kind, family.size());
    const GramMatrix g = gram_matrix(w, family, cfg.threads);
    const auto md = metric_decomposition(g.H);
    const auto hssc = hssc_estimate(g, family, K, L);
    const double norm = g.H.norm();
    const double min_eig = md.eigenvalues.size() ? md.eigenvalues.minCoeff() : 0.0;
    const bool psd = min_eig >= -1e-8 * md.eigenvalues.cwiseAbs().maxCoeff();
    const bool eta_ok = md.eta_square_deviation <= 1e-12;
    const bool herm_ok = g.hermiticity_deviation < 1e-8;
    bool pass = eta_ok && herm_ok;
    if (kind == "in" || kind == "out") pass = pass && psd;

    json matrix = json::array();
    std::string csv = "i,j,re,im\n";
    for (Eigen::Index i = 0; i < g.H.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < g.H.cols(); ++k) {
            row.push_back(json::array({g.H(i, k).real(), g.H(i, k).imag()}));
            csv += std::to_string(i) + "," + std::to_string(k) + "," + num(g.H(i, k).real()) + "," +
                   num(g.H(i, k).imag()) + "\n";
        }
        matrix.push_back(row);
    }
    json j = stamp("gram", cfg);
    j["functional"] = kind;
    j["matrix"] = matrix;
    j["eigenvalues"] = std::vector<double>(md.eigenvalues.data(), md.eigenvalues.data() + md.eigenvalues.size());
    j["inertia"] = {{"positive", md.inertia.positive}, {"negative", md.inertia.negative}, {"null", md.inertia.null}};
    j["eta_check"] = {{"max_deviation", md.eta_square_deviation}, {"pass", eta_ok}};
    j["hermiticity_deviation"] = g.hermiticity_deviation;
    j["hssc_constant"] = hssc.constant;
    j["hssc_K"] = K;
    j["hssc_L"] = L;
    j["norm"] = norm;
    j["min_eigenvalue"] = min_eig;
    j["psd"] = psd;
    j["pass"] = pass;
    write_json(out / "gram.json", j);
    write_text(out / "gram.csv", csv);
    return pass ? kExitPass : kExitNumerical;
}

int cmd_truncate_demo(const RunConfig& cfg, const fs::path& out) {
    const json& b = cfg.block("truncate_demo");
    const std::string w = "truncate_demo";
    const int N = get_int(b, "max_order", w, 5);
    const int tuples = get_int(b, "tuples", w, 100);
    const int d = get_int(b, "d", w, cfg.model.d);
    const double tol = get_number(b, "tolerance", w, 1e-12);
    if (N < 0 || N > 8 || tuples < 1) throw ConfigError("truncate_demo: needs 0 <= max_order <= 8 and tuples >= 1");
    const auto W = random_kernel_family(N, d, cfg.seed);
    const auto back = untruncate(truncate(W));
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> g(0.0, 1.0);
    json orders = json::array();
    bool pass = true;
    for (int n = 0; n <= N; ++n) {
        double worst = 0.0;
        for (int s = 0; s < tuples; ++s) {
            std::vector<FourVector> k;
            for (int l = 0; l < n; ++l) {
                FourVector v(d);
                for (int c = 0; c < d; ++c) v[c] = g(rng);
                k.push_back(v);
            }
            const cplx a = W(k);
            const cplx c = back(k);
            worst = std::max(worst, std::abs(a - c) / std::max(std::abs(a), 1e-300));
        }
        const auto parts = enumerate_partitions(n).size();
        const bool ok = worst <= tol && parts == bell_number(n);
        pass = pass && ok;
        orders.push_back({{"n", n}, {"partitions", parts}, {"bell", bell_number(n)}, {"max_rel_error", worst}});
    }
    json j = stamp("truncate-demo", cfg);
    j["orders"] = orders;
    j["tuples"] = tuples;
    j["tolerance"] = tol;
    j["pass"] = pass;
    write_json(out / "truncate_demo.json", j);
    return pass ? kExitPass : kExitNumerical;
}

int cmd_pvdemo(const RunConfig& cfg, const fs::path& out) {
    const json& b = cfg.block("pvdemo");
    const std::string w = "pvdemo";
    const double R = get_number(b, "half_range", w, 10.0);
    const int sign = get_int(b, "sign", w, 1);
    const double eps = get_number(b, "eps", w, 1e-5);
    const double width = get_number(b, "width", w, 1.0);
    const double centre = get_number(b, "center", w, 0.0);
    const double tol = get_number(b, "tolerance", w, 1e-2);
    const double stol = get_number(b, "sokhotsky_tolerance", w, 1e-6);
    if (!(width > 0.0)) throw ConfigError("pvdemo.width: must be positive");
    const auto grid = t_grid_of(b, w);
    const auto f = [width, centre](double x) {
        const double y = (x - centre) / width;
        return cplx(std::exp(-0.5 * y * y), 0.0);
    };
    const auto rep = pv_limit_demo(f, R, grid, sign);
    const auto sok = sokhotsky_check(f, R, eps);
    const bool pass = rep.final_relative_error < tol && sok.deviation < stol;
    json j = stamp("pvdemo", cfg);
    j["report"] = report_json(rep);
    j["sokhotsky"] = {{"eps", sok.eps},
                      {"pv_minus_ipi", complex_to_json(sok.pv_minus_ipi)},
                      {"regulated", complex_to_json(sok.regulated)},
                      {"extrapolated", complex_to_json(sok.extrapolated)},
                      {"raw_deviation", sok.raw_deviation},
                      {"deviation", sok.deviation}};
    j["pass"] = pass;
    write_json(out / "pvdemo.json", j);
    write_text(out / "pvdemo.csv", convergence_csv(rep));
    return pass ? kExitPass : kExitNumerical;
}

} // namespace

std::vector<std::string> command_names() { return {"amplitude", "converge", "fit", "gram", "truncate-demo", "pvdemo"}; }

int run_command(const std::string& command, RunConfig cfg, const std::string& out_dir) {
    try {
        fs::create_directories(out_dir);
        const fs::path out(out_dir);
        if (command == "amplitude") return cmd_amplitude(cfg, out);
        if (command == "converge") return cmd_converge(cfg, out);
        if (command == "fit") return cmd_fit(cfg, out);
        if (command == "gram") return cmd_gram(cfg, out);
        if (command == "truncate-demo") return cmd_truncate_demo(cfg, out);
        if (command == "pvdemo") return cmd_pvdemo(cfg, out);
        spdlog::error("unknown command '{}'", command);
        return kExitUsage;
    } catch (const NumericalError& e) {
        spdlog::error("{}: numerical failure: {}", command, e.what());
        return kExitNumerical;
    } catch (const InvalidArgument& e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitUsage;
    } catch (const json::exception& e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}: {}", command, e.what());
        return kExitUsage;
    }
}

int run_command(const RunOptions& opts) {
    RunConfig cfg;
    try {
        cfg = load_config(opts.config_path);
    } catch (const InvalidArgument& e) {
        spdlog::error("{}", e.what());
        return kExitUsage;
    }
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.raw["seed"] = *opts.seed;
    }
    if (opts.threads) {
        if (*opts.threads == 0) {
            spdlog::error("--threads must be positive");
            return kExitUsage;
        }
        // Thread count does not change results, so it stays out of the hash.
        cfg.threads = *opts.threads;
    }
    return run_command(opts.command, std::move(cfg), opts.out_dir);
}

} // namespace qftscat
