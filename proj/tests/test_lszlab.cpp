#include "doctest.h"

#include "qftscat/lszlab.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace qftscat;
using namespace qftscat::oracle;

namespace {

constexpr double kPi = std::numbers::pi;

FormFactorEvaluator evaluator(double rel_tol = 1e-8) {
    QuadratureSettings q;
    q.rel_tol = rel_tol;
    FormFactorEvaluator ev;
    ev.structure = StructureEvaluator(ModelParams{2, 1.0, 1.0, 0.5}, SpectralDensity::none(), q);
    return ev;
}

FiniteTimeSetup three_leg_setup() {
    FiniteTimeSetup s;
    s.f.legs.emplace_back(FourVector{-1.2, 0.3}, 0.4);
    s.f.legs.emplace_back(FourVector{0.1, 0.2}, 0.4);
    s.f.legs.emplace_back(FourVector{1.3, -0.4}, 0.4);
    s.labels = {LegLabel::In, LegLabel::Loc, LegLabel::Out};
    s.ev = evaluator();
    return s;
}

FiniteTimeSetup elastic_setup(double rel_tol = 1e-8) {
    FiniteTimeSetup s;
    s.f = elastic_packets();
    s.labels = {LegLabel::In, LegLabel::In, LegLabel::Out, LegLabel::Out};
    s.ev = evaluator(rel_tol);
    return s;
}

cplx gaussian(double x) { return {std::exp(-0.5 * x * x), 0.0}; }

} // namespace

TEST_SUITE("lszlab") {

TEST_CASE("time multipliers are exactly one on either shell") {
    const ModelParams p{2, 1.0, 1.0, 0.5};
    const CutoffSpec c = CutoffSpec::from(p);
    for (double t : {0.0, 1.0, 37.5, 1e3, -12.0}) {
        for (double k : {-2.0, 0.0, 0.7, 5.0}) {
            for (int sign : {-1, 1}) {
                const ShellPoint sp{{k}, 1.0, sign};
                for (LegLabel a : {LegLabel::In, LegLabel::Loc, LegLabel::Out}) {
                    CHECK(chi_t(a, sp, t, p, c) == cplx(1.0, 0.0));
                }
            }
        }
    }
    // Far from both shells the cutoff removes everything except the local label.
    const FourVector off{0.2, 0.1};
    CHECK(chi_t(LegLabel::In, off, 3.0, p, c) == cplx(0.0, 0.0));
    CHECK(chi_t(LegLabel::Loc, off, 3.0, p, c) == cplx(1.0, 0.0));
    // Near the forward shell the in multiplier is a pure phase e^{-i(k0 - w)t}.
    const FourVector near{std::hypot(0.4, 1.0) + 0.01, 0.4};
    const cplx v = chi_t(LegLabel::In, near, 10.0, p, c);
    CHECK(std::abs(v - std::exp(cplx(0.0, -0.1))) < 1e-12);
}

TEST_CASE("multi-time schedules scale later legs by the ratio") {
    const auto id = MultiTimeSchedule::identity(3, 0.5).times(8.0);
    CHECK(id == std::vector<double>{8.0, 4.0, 2.0});
    const auto rev = MultiTimeSchedule::reversed(3, 0.5).times(8.0);
    CHECK(rev == std::vector<double>{2.0, 4.0, 8.0});
}

TEST_CASE("principal-value demo follows i pi erf(t / sqrt 2) for a Gaussian") {
    const auto grid = default_t_grid();
    const ConvergenceReport r = pv_limit_demo(gaussian, 10.0, grid, 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx expect(0.0, kPi * std::erf(grid[i] / std::sqrt(2.0)));
        CHECK(std::abs(r.values[i] - expect) < 1e-9);
    }
    CHECK(r.final_relative_error < 1e-2);
    CHECK(r.status == "CONVERGED");
    const ConvergenceReport m = pv_limit_demo(gaussian, 10.0, grid, -1);
    CHECK(std::abs(m.values.back() + r.values.back()) < 1e-12);
}

TEST_CASE("regulated integral approaches PV minus i pi f(0)") {
    auto f = [](double x) { return cplx(std::exp(-0.5 * (x - 0.3) * (x - 0.3)), 0.2 * x * std::exp(-x * x)); };
    const SokhotskyCheck c = sokhotsky_check(f, 10.0, 1e-5);
    CHECK(c.deviation < 1e-8);
    CHECK(c.raw_deviation < 1e-4);
    // PV of the even part vanishes, leaving -i pi f(0) for the imaginary part of a real even f.
    const SokhotskyCheck g = sokhotsky_check(gaussian, 10.0, 1e-5);
    CHECK(std::abs(g.pv_minus_ipi - cplx(0.0, -kPi)) < 1e-12);
}

TEST_CASE("continuum two-point term decays like an oscillatory integral") {
    PacketProduct f;
    f.legs.emplace_back(FourVector{-2.5, 0.3}, 0.6);
    f.legs.emplace_back(FourVector{2.4, -0.2}, 0.6);
    QuadratureSettings q;
    q.rel_tol = 1e-9;
    const StructureEvaluator ev(ModelParams{2, 1.0, 1.0, 0.5}, SpectralDensity::bump(2.0, 3.0, 0.8), q);
    const std::vector<double> grid = default_t_grid(24, 1.0, 1e3);
    const ConvergenceReport r = riemann_lebesgue_decay(ev.rho, f, grid, ev);
    // Direct double integral over mass and momentum at the first two grid times.
    for (std::size_t i : {std::size_t{0}, std::size_t{3}}) {
        const double t = grid[i];
        const cplx expect = gl(
            [&](double mu) {
                return ev.rho(mu) * gl(
                                        [&](double p) {
                                            const double w = std::hypot(p, mu);
                                            const double wm = std::hypot(p, 1.0);
                                            return f[0](FourVector{-w, p}) * f[1](FourVector{w, -p}) *
                                                   std::exp(cplx(0.0, (wm - w) * t)) / (2.0 * w);
                                        },
                                        -8.0, 8.0, 48);
            },
            2.0, 3.0, 48);
        CHECK(std::abs(r.values[i] - expect) <= 1e-6 * std::abs(expect));
    }
    double peak = 0.0;
    for (const cplx& v : r.values) peak = std::max(peak, std::abs(v));
    CHECK(std::abs(r.values.back()) < 0.05 * peak);
    CHECK(r.envelope_ok);
    const ConvergenceReport none = riemann_lebesgue_decay(SpectralDensity::none(), f, grid, ev);
    CHECK(none.values.back() == cplx(0.0, 0.0));
}

TEST_CASE("L1 norm of the Fourier transform of a unit Gaussian is sqrt(2 pi)") {
    WavePacket g(FourVector{0.0}, 1.0);
    const FourierBound b = l1_fourier_bound(g);
    CHECK(std::abs(b.lhs - std::sqrt(2.0 * kPi)) < 1e-8);
    CHECK(b.pass);
}

TEST_CASE("Fourier L1 bound holds across packet widths") {
    for (int i = 0; i < 20; ++i) {
        const double w = 0.1 * std::pow(100.0, i / 19.0);
        WavePacket g(FourVector{0.4}, w);
        g.poly = LegPolynomial::constant(1.0).times_linear(0, 0.1);
        const FourierBound b = l1_fourier_bound(g);
        CHECK_MESSAGE(b.lhs <= b.rhs, "width " << w);
        CHECK(b.pass);
    }
    CHECK_THROWS_AS(l1_fourier_bound(WavePacket(FourVector{0.0, 0.0}, 1.0)), InvalidArgument);
}

TEST_CASE("convergence analysis recovers a power-law rate and flags growth") {
    const auto grid = default_t_grid(20, 1.0, 1e3);
    std::vector<cplx> vals;
    std::vector<cplx> avg;
    for (double t : grid) {
        avg.push_back(cplx(2.0, 0.0) + 0.3 / (t * t));
        vals.push_back(avg.back() + cplx(0.0, 0.1 / t));
    }
    const ConvergenceReport r = analyse_convergence(grid, vals, avg, cplx(2.0, 0.0));
    CHECK(r.fit_valid);
    CHECK(r.fit_alpha == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.fit_C == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(r.envelope_ok);
    CHECK(r.status == "CONVERGED");

    std::vector<cplx> grow;
    for (double t : grid) grow.push_back(cplx(2.0 + 1e-3 * t, 0.0));
    const ConvergenceReport bad = analyse_convergence(grid, grow, grow, cplx(2.0, 0.0));
    CHECK_FALSE(bad.envelope_ok);
    CHECK(bad.status == "FAILED CONVERGENCE");
    CHECK_THROWS_AS(analyse_convergence({1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}, std::nullopt), InvalidArgument);
}

TEST_CASE("three-leg pairing with a local middle leg is time independent") {
    const FiniteTimeSetup s = three_leg_setup();
    const FiniteTimePairing fast(s, 1e3);
    const cplx expect = structure_term(s.f, 1.0, 1);
    for (double t : {1.0, 10.0, 1e3}) {
        const std::vector<double> times = MultiTimeSchedule::identity(3).times(t);
        CHECK(std::abs(fast.value(times) - expect) <= 1e-6 * std::abs(expect));
    }
    CHECK(std::abs(fast.limit() - expect) <= 1e-6 * std::abs(expect));
    const std::vector<double> times = {2.0, 1.0, 0.5};
    CHECK(std::abs(finite_time_pairing(s, times).value - expect) <= 1e-6 * std::abs(expect));
}

TEST_CASE("fast finite-time pairing agrees with the direct pairing") {
    const FiniteTimeSetup s = elastic_setup(1e-7);
    const FiniteTimePairing fast(s, 100.0);
    const std::vector<double> times = MultiTimeSchedule::identity(4).times(3.0);
    const cplx direct = finite_time_pairing(s, times).value;
    const cplx quick = fast.value(times);
    CHECK(std::abs(quick - direct) <= 1e-5 * std::abs(direct));
}

TEST_CASE("fast pairing limit is the scattering form factor") {
    const FiniteTimeSetup s = elastic_setup(1e-9);
    const FiniteTimePairing fast(s, 1e3);
    const cplx expect = cplx(0.0, 2.0 * kPi) * on_shell_2to2(s.f, 1.0);
    CHECK(std::abs(fast.limit() - expect) <= 1e-6 * std::abs(expect));
    const std::vector<double> times = MultiTimeSchedule::identity(4).times(1e3);
    CHECK(std::abs(fast.window_average(times) - expect) <= 1e-2 * std::abs(expect));
}

}
