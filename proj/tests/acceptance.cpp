// Acceptance checks: one PASS/FAIL line per criterion at its stated tolerance.

#include "qftscat/fitter.hpp"
#include "qftscat/formfactor.hpp"
#include "qftscat/gns.hpp"
#include "qftscat/lszlab.hpp"
#include "qftscat/truncation.hpp"

#include "CLI11.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace qftscat;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

struct Criterion {
    std::string id;
    std::string title;
    std::function<void(Outcome&)> run;
};

const ModelParams kModel{2, 1.0, 1.0, 0.5};

FormFactorEvaluator evaluator(double rel_tol = 1e-8) {
    QuadratureSettings q;
    q.rel_tol = rel_tol;
    FormFactorEvaluator ev;
    ev.structure = StructureEvaluator(kModel, SpectralDensity::none(), q);
    return ev;
}

std::vector<FourVector> random_points(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<FourVector> k;
    for (int l = 0; l < n; ++l) k.push_back(FourVector{g(rng), g(rng)});
    return k;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

PacketProduct three_packets() {
    PacketProduct f;
    f.legs.emplace_back(FourVector{-1.2, 0.3}, 0.4);
    f.legs.emplace_back(FourVector{0.1, 0.2}, 0.4);
    f.legs.emplace_back(FourVector{1.3, -0.4}, 0.4);
    return f;
}

const std::vector<LegLabel> kThreeLabels = {LegLabel::In, LegLabel::Loc, LegLabel::Out};
const std::vector<LegLabel> kFourLabels = {LegLabel::In, LegLabel::In, LegLabel::Out, LegLabel::Out};

// (q12 + q13 + q23) / (3 m^2)
TransferPolynomial symmetric_q12() { return symmetrize_realify(TransferPolynomial::monomial(3, 0, 1)); }

// sum_{i<j} q_ij^2 / m^4 for four legs
TransferPolynomial symmetric_square_sum() {
    TransferPolynomial p(4);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            TransferPolynomial::Exponents e(InvariantVector::size_for(4), 0);
            e[InvariantVector::index(i, j)] = 2;
            p.add_term(e, 1.0);
        }
    return p;
}

std::optional<TransferFamily> family_with(int n, const std::optional<TransferPolynomial>& p) {
    if (!p) return std::nullopt;
    TransferFamily fam;
    fam.members[n] = *p;
    return fam;
}

// ---------------------------------------------------------------------------

void truncation_round_trip(Outcome& o) {
    const std::vector<std::uint64_t> bell = {1, 1, 2, 5, 15, 52};
    for (int n = 0; n <= 5; ++n) {
        o.require(enumerate_partitions(n).size() == bell[static_cast<std::size_t>(n)] &&
                      bell_number(n) == bell[static_cast<std::size_t>(n)],
                  "partition count n=" + std::to_string(n));
    }
    double worst = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto W = random_kernel_family(5, 2, seed);
        const auto back = untruncate(truncate(W));
        std::mt19937_64 rng(seed + 100);
        for (int n = 0; n <= 5; ++n)
            for (int s = 0; s < 100; ++s) {
                const auto k = random_points(rng, n);
                worst = std::max(worst, rel(back(k), W(k)));
            }
    }
    o.require(worst <= 1e-12, "round trip error");
    o.detail << "Bell(0..5) = 1,1,2,5,15,52; max relative round-trip error " << worst << " over 3 families x 100 tuples";
}

void truncation_multipliers(Outcome& o) {
    auto A = [](const FourVector& k) { return std::exp(cplx(0.2 * k[1], -0.5 * k[0])) * (1.0 + 0.1 * k[0]); };
    double mult = 0.0;
    double embed = 0.0;
    std::mt19937_64 rng(77);
    for (std::uint64_t seed : {5u, 6u}) {
        const auto W = random_kernel_family(4, 2, seed);
        const auto lhs = truncate(apply_leg_multiplier(W, A));
        const auto rhs = apply_leg_multiplier(truncate(W), A);
        for (int n = 0; n <= 4; ++n)
            for (int s = 0; s < 50; ++s) {
                const auto k = random_points(rng, n);
                mult = std::max(mult, std::abs(lhs(k) - rhs(k)) / std::max(1.0, std::abs(rhs(k))));
            }
        const auto bl = truncate_bilinear(tensor_embedding(W));
        const auto br = tensor_embedding(truncate(W));
        for (int r = 0; r <= 4; ++r)
            for (int q = 0; r + q <= 4; ++q)
                for (int s = 0; s < 25; ++s) {
                    const auto x = random_points(rng, r);
                    const auto y = random_points(rng, q);
                    embed = std::max(embed, std::abs(bl(x, y) - br(x, y)) / std::max(1.0, std::abs(br(x, y))));
                }
    }
    o.require(mult <= 1e-12, "leg multiplier commutation");
    o.require(embed <= 1e-12, "tensor embedding compatibility");
    o.detail << "multiplier commutation " << mult << ", tensor embedding " << embed << " (n+m <= 4)";
}

void lsz_limit(Outcome& o) {
    const std::vector<double> grid = default_t_grid(32, 1.0, 1e3);
    const std::vector<MultiTimeSchedule> orders3 = {MultiTimeSchedule::identity(3), MultiTimeSchedule::reversed(3)};
    const std::vector<MultiTimeSchedule> orders4 = {MultiTimeSchedule::identity(4), MultiTimeSchedule::reversed(4)};
    struct Case {
        std::string name;
        PacketProduct f;
        std::vector<LegLabel> labels;
        std::optional<TransferPolynomial> M;
        const std::vector<MultiTimeSchedule>* orders;
    };
    const std::vector<Case> cases = {
        {"n=3 M=1", three_packets(), kThreeLabels, std::nullopt, &orders3},
        {"n=3 M=sym(q12)/m^2", three_packets(), kThreeLabels, symmetric_q12(), &orders3},
        {"n=4 M=1", oracle::elastic_packets(), kFourLabels, std::nullopt, &orders4},
        {"n=4 M=sum q_ij^2/m^4", oracle::elastic_packets(), kFourLabels, symmetric_square_sum(), &orders4},
    };
    for (const Case& c : cases) {
        FiniteTimeSetup s;
        s.f = c.f;
        s.labels = c.labels;
        s.ev = evaluator();
        s.ev.transfer = family_with(static_cast<int>(c.f.size()), c.M);
        const cplx target = s.ev.transfer ? eval_F_n(s.labels, s.f, s.ev).value : eval_FG_n(s.labels, s.f, s.ev).value;
        const ConvergenceStudy st = convergence_study(s, grid, *c.orders, target);
        double err = 0.0;
        bool envelope = true;
        for (const auto& r : st.reports) {
            err = std::max(err, r.final_relative_error);
            envelope = envelope && r.envelope_ok;
        }
        o.require(err <= 1e-2, c.name + " relative error");
        o.require(envelope, c.name + " envelope");
        o.require(st.ordering_independent, c.name + " ordering independence");
        o.detail << c.name << ": target " << target.real() << (target.imag() < 0 ? "-" : "+") << std::abs(target.imag())
                 << "i, rel err at t=1e3 " << err << ", spread " << st.spread << " <= unc " << st.uncertainty << "; ";
    }
    o.detail << "n=3 in/out shell atoms vanish for equal masses (t-independent case)";
}

void pv_limit(Outcome& o) {
    auto f = [](double x) { return cplx(std::exp(-0.5 * x * x), 0.0); };
    const auto grid = default_t_grid(32, 1.0, 1e3);
    const ConvergenceReport r = pv_limit_demo(f, 10.0, grid, 1);
    const double raw = std::abs(r.values.back() - cplx(0.0, kPi)) / kPi;
    o.require(r.final_relative_error < 1e-2, "window-averaged error at t=1e3");
    o.require(raw < 1e-2, "raw error at t=1e3");
    const SokhotskyCheck s = sokhotsky_check(f, 10.0, 1e-5);
    o.require(s.deviation < 1e-6, "Sokhotsky identity");
    o.detail << "rel err at t=1e3 " << r.final_relative_error << " (raw " << raw << "); Sokhotsky deviation "
             << s.deviation << " (eps->0 extrapolated, raw eps=1e-5: " << s.raw_deviation << ")";
}

void riemann_lebesgue(Outcome& o) {
    PacketProduct f;
    f.legs.emplace_back(FourVector{-2.5, 0.3}, 0.6);
    f.legs.emplace_back(FourVector{2.4, -0.2}, 0.6);
    const StructureEvaluator ev(kModel, SpectralDensity::standard(kModel.m), QuadratureSettings{});
    const std::vector<double> grid = default_t_grid(40, 1e-6, 1e3);
    const ConvergenceReport r = riemann_lebesgue_decay(ev.rho, f, grid, ev);
    const double start = std::abs(r.values.front());
    const double ratio = std::abs(r.values.back()) / start;
    o.require(start > 0.0, "nonzero continuum term");
    o.require(ratio < 0.05, "decay below 5%");
    o.detail << "|term(t=0)| " << start << ", |term(t=1e3)|/|term(0)| " << ratio;
}

void fourier_bound(Outcome& o) {
    const FourierBound g = l1_fourier_bound(WavePacket(FourVector{0.0}, 1.0));
    const double gauss_err = std::abs(g.lhs - std::sqrt(2.0 * kPi));
    o.require(gauss_err < 1e-8, "Gaussian L1 norm");
    double worst_ratio = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double w = 0.1 * std::pow(100.0, i / 19.0);
        WavePacket p(FourVector{0.3}, w);
        p.poly = LegPolynomial::constant(1.0).times_linear(0, -0.2);
        const FourierBound b = l1_fourier_bound(p);
        worst_ratio = std::max(worst_ratio, b.lhs / b.rhs);
        o.require(b.lhs <= b.rhs, "bound at width " + std::to_string(w));
    }
    o.detail << "Gaussian |lhs - sqrt(2 pi)| " << gauss_err << "; max lhs/rhs over 20 widths in [0.1, 10] "
             << worst_ratio;
}

WavePacket packet(double e, double p, double w, cplx amp = 1.0) {
    WavePacket f(FourVector{e, p}, w);
    f.amplitude = amp;
    return f;
}

void gram_positivity(Outcome& o) {
    const FormFactorEvaluator ev = evaluator();
    PacketProduct two;
    two.legs = {packet(1.1, 0.3, 0.4), packet(1.3, -0.6, 0.4)};
    BorchersVector mixed = BorchersVector::single(packet(1.1, 0.2, 0.6), cplx(0.5, 0.5));
    mixed.scalar = 1.0;
    const std::vector<std::vector<BorchersVector>> families = {
        {BorchersVector::single(packet(1.3, 0.5, 0.4)), BorchersVector::single(packet(1.5, -0.8, 0.5), cplx(0.0, 1.0)),
         BorchersVector::of(two), mixed},
        {BorchersVector::single(packet(1.2, 0.0, 0.3)), BorchersVector::single(packet(1.25, 0.1, 0.35)),
         BorchersVector::single(packet(2.0, 1.7, 0.5)), BorchersVector::single(packet(1.6, -1.2, 0.8), cplx(0.3, -1.0))},
    };
    double worst_min = 1e300;
    double worst_eta = 0.0;
    double worst_herm = 0.0;
    for (LegLabel label : {LegLabel::In, LegLabel::Out}) {
        for (const auto& fam : families) {
            const PositivityResult r = inout_positivity_check(ev, label, fam);
            const MetricDecomposition m = metric_decomposition(r.gram.H);
            const double norm = m.eigenvalues.cwiseAbs().maxCoeff();
            worst_min = std::min(worst_min, r.min_eigenvalue / norm);
            worst_eta = std::max(worst_eta, m.eta_square_deviation);
            worst_herm = std::max(worst_herm, r.gram.hermiticity_deviation);
            o.require(r.pass, to_string(label) + " Gram PSD");
        }
    }
    o.require(worst_eta <= 1e-12, "eta^2 = I");
    o.require(worst_herm < 1e-8, "Hermiticity");
    o.detail << "min eigenvalue / ||H|| " << worst_min << " (in and out, 2 families of 4); eta^2 deviation "
             << worst_eta << "; Hermiticity deviation " << worst_herm;
}

void fit_pipeline(Outcome& o) {
    // Planted degree-2 polynomial.
    FitConfig pc;
    pc.E_max = 4.0;
    pc.train_count = 300;
    pc.validate_count = 300;
    pc.seed = 5;
    const FitReport planted =
        fit_polynomial(make_reference("planted_quadratic", 4, {}, kModel.m), sample_Qn(4, 2, pc, kModel), pc);
    o.require(planted.pass && planted.achieved_sup_error <= 1e-10, "planted recovery");

    // Smooth bounded symmetric reference on Q_4(10 m), two incoming legs.
    FitConfig ec;
    ec.E_max = 10.0;
    ec.epsilon = 1e-3;
    ec.max_degree = 10;
    ec.train_count = 1500;
    ec.validate_count = 1500;
    ec.seed = 7;
    const PhaseSpaceSample sample = sample_Qn(4, 2, ec, kModel);
    double residual = 0.0;
    for (const auto& p : sample.points) residual = std::max(residual, qn_constraint_residual(p, 2, ec.E_max, kModel.m));
    const FitReport smooth = fit_polynomial(make_reference("exp_sym", 4, {}, kModel.m), sample, ec);
    o.require(residual <= 1e-10, "sample constraint residual");
    o.require(smooth.pass && smooth.achieved_sup_error <= 1e-3, "epsilon = 1e-3 fit");

    // Emptiness: the sampler's verdict against the exact rule. A nonempty region either yields
    // points or is reported with the low acceptance-rate diagnostic.
    bool exact = true;
    int rate_limited = 0;
    for (int n = 3; n <= 8; ++n)
        for (int r = 1; r < n; ++r) {
            const double threshold = std::max(r, n - r) * kModel.m;
            for (double E : {threshold - 0.05, threshold + 0.05, 2.0 * threshold + 1.0}) {
                FitConfig c;
                c.E_max = E;
                c.train_count = 5;
                c.validate_count = 5;
                const PhaseSpaceSample s = sample_Qn(n, r, c, kModel);
                const bool nonempty = qn_nonempty(n, r, E, kModel.m);
                const bool rate_diag = s.diagnostics.find("acceptance rate") != std::string::npos;
                if (nonempty && s.points.empty() && rate_diag) ++rate_limited;
                exact = exact && s.kinematically_empty == !nonempty;
                exact = exact && (nonempty ? (!s.points.empty() || rate_diag) : s.points.empty());
            }
        }
    o.require(exact, "emptiness exactness");
    // Every order above 2 E_max / m is empty; order 4 just above E_max / m is not.
    bool above = true;
    for (int n = 21; n <= 24; ++n)
        for (int r = 1; r < n; ++r) above = above && !qn_nonempty(n, r, 10.0, kModel.m);
    o.require(above, "Q_n empty for n > 2 E_max / m");
    const bool literal_counterexample = qn_nonempty(4, 2, 3.0, kModel.m);

    bool family_ok = false;
    bool herm = false;
    try {
        const TransferFamily fam = build_family({{4, smooth}}, 10);
        family_ok = validate_transfer_family(fam).pass;
        herm = hermiticity_identity_check(fam.member(4));
    } catch (const std::exception& e) {
        o.detail << "family: " << e.what() << "; ";
    }
    o.require(family_ok, "fitted family admissible");
    o.require(herm, "hermiticity identity");
    o.detail << "planted sup error " << planted.achieved_sup_error << " at degree " << planted.degree_used
             << "; exp_sym on Q_4(10m): sup error " << smooth.achieved_sup_error << " at degree " << smooth.degree_used
             << " (rank " << smooth.rank << "/" << smooth.basis_size << "); Q_3 empty for all E_max; emptiness exact over n=3..8 ("
             << rate_limited << " near-threshold regions below the sampler's acceptance floor)"
             << (literal_counterexample ? " (n > E_max/m alone is not sufficient: Q_4(3m) with r=2 is nonempty)" : "");
}

void quadrature_consistency(Outcome& o) {
    const FormFactorEvaluator ev = evaluator(1e-7);
    struct Case {
        std::string name;
        PacketProduct f;
        std::vector<LegLabel> labels;
        std::optional<TransferPolynomial> M;
    };
    const std::vector<Case> cases = {
        {"n=4 M=1", oracle::elastic_packets(), kFourLabels, std::nullopt},
        {"n=4 M=sum q_ij^2", oracle::elastic_packets(), kFourLabels, symmetric_square_sum()},
        {"n=3 M=1", three_packets(), kThreeLabels, std::nullopt},
        {"n=3 M=sym(q12)", three_packets(), kThreeLabels, symmetric_q12()},
    };
    double worst = 0.0;
    for (const Case& c : cases) {
        FormFactorEvaluator e = ev;
        e.transfer = family_with(static_cast<int>(c.f.size()), c.M);
        auto run = [&](const FormFactorEvaluator& x) {
            return x.transfer ? eval_F_n(c.labels, c.f, x).value : eval_FG_n(c.labels, c.f, x).value;
        };
        const double d = rel(run(e), run(e.refined()));
        worst = std::max(worst, d);
        o.require(d <= 5e-3, c.name + " refinement");
    }
    // k1.k2 as a weight against sum_mu eta_mu (k1_mu f1)(k2_mu f2) with no weight.
    auto q12 = [](std::span<const FourVector> k) { return cplx(minkowski_dot(k[0], k[1]), 0.0); };
    double two_path = 0.0;
    for (const Case& c : {cases[0], cases[2]}) {
        const cplx direct = eval_FG_n(c.labels, c.f, ev, q12).value;
        cplx split{0.0, 0.0};
        for (int mu = 0; mu < 2; ++mu) {
            PacketProduct g = c.f;
            g.legs[0].poly = g.legs[0].poly.times_linear(mu, 0.0);
            g.legs[1].poly = g.legs[1].poly.times_linear(mu, 0.0);
            split += (mu == 0 ? 1.0 : -1.0) * eval_FG_n(c.labels, g, ev).value;
        }
        const double d = rel(split, direct);
        two_path = std::max(two_path, d);
        o.require(d <= 5e-3, c.name + " two-path weighting");
    }
    o.detail << "max relative change under refinement " << worst << " over 4 amplitudes; two-path weighting "
             << two_path;
}

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {"truncation_round_trip", "truncation round trip and partition counts", truncation_round_trip},
        {"truncation_multipliers", "truncation commutes with leg multipliers and tensor embedding",
         truncation_multipliers},
        {"lsz_limit", "finite-time pairings converge to the amplitude", lsz_limit},
        {"pv_limit", "principal-value limit and Sokhotsky identity", pv_limit},
        {"riemann_lebesgue", "continuum two-point term decays", riemann_lebesgue},
        {"fourier_bound", "L1 Fourier bound", fourier_bound},
        {"gram_positivity", "in/out Gram positivity, metric operator, Hermiticity", gram_positivity},
        {"fit_pipeline", "transfer-function fit pipeline", fit_pipeline},
        {"quadrature_consistency", "refinement stability and two-path weighting", quadrature_consistency},
    };
    return list;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<std::string> selected;
    bool list = false;
    app.add_option("--criterion", selected, "run only these criteria");
    app.add_flag("--list", list, "list criterion ids");
    CLI11_PARSE(app, argc, argv);
    if (list) {
        for (const auto& c : criteria()) std::printf("%s  %s\n", c.id.c_str(), c.title.c_str());
        return 0;
    }
    std::set<std::string> known;
    for (const auto& c : criteria()) known.insert(c.id);
    for (const auto& s : selected) {
        if (!known.count(s)) {
            std::fprintf(stderr, "unknown criterion '%s'\n", s.c_str());
            return 2;
        }
    }
    int failures = 0;
    for (const auto& c : criteria()) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "[exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id.c_str(), o.detail.str().c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
