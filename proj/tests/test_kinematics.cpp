#include "doctest.h"

#include "qftscat/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace qftscat;

TEST_SUITE("kinematics") {

TEST_CASE("Minkowski products and shells") {
    const FourVector k{3.0, 1.0, 2.0};
    CHECK(minkowski_dot(k, k) == doctest::Approx(4.0));
    const std::vector<double> p{0.3, -0.4};
    CHECK(omega(p, 1.2) == doctest::Approx(std::sqrt(1.44 + 0.25)));
    ShellPoint s{{0.3, -0.4}, 1.2, -1};
    const FourVector q = s.momentum();
    CHECK(q.energy() < 0.0);
    CHECK(minkowski_dot(q, q) == doctest::Approx(1.44).epsilon(1e-14));
    const ShellPoint back = ShellPoint::from_momentum(q, 1.2);
    CHECK(back.sign == -1);
    CHECK(back.spatial == s.spatial);
    // omega_of and omega agree bit for bit
    CHECK(omega_of(q, 1.2) == omega(p, 1.2));
}

TEST_CASE("Lorentz transforms preserve Minkowski products") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int d = 2; d <= 4; ++d) {
        LorentzTransform L = LorentzTransform::boost(d, 1, 0.7);
        if (d >= 3) L = L.compose(LorentzTransform::rotation(d, 1, 2, 0.4)).compose(LorentzTransform::boost(d, 2, -0.3));
        for (int s = 0; s < 20; ++s) {
            FourVector a(d);
            FourVector b(d);
            for (int c = 0; c < d; ++c) {
                a[c] = g(rng);
                b[c] = g(rng);
            }
            CHECK(minkowski_dot(L.apply(a), L.apply(b)) == doctest::Approx(minkowski_dot(a, b)).epsilon(1e-12));
        }
    }
}

TEST_CASE("cutoff plateau and support") {
    const CutoffSpec c{0.5};
    CHECK(c.phi(0.0) == 1.0);
    CHECK(c.phi(0.25) == 1.0);
    CHECK(c.phi(-0.25) == 1.0);
    CHECK(c.phi(0.5) == 0.0);
    CHECK(c.phi(-0.7) == 0.0);
    double prev = 1.0;
    for (double x = 0.25; x <= 0.5; x += 0.005) {
        const double v = c.phi(x);
        CHECK(v <= prev + 1e-15);
        CHECK(v == doctest::Approx(c.phi(-x)));
        prev = v;
    }
    ModelParams mp;
    const FourVector on{std::sqrt(2.0), 1.0};
    CHECK(chi_plus_minus(on, 1, mp, c) == 1.0);
    CHECK(chi_plus_minus(on, -1, mp, c) == 0.0);
    CHECK(chi_plus_minus(-on, -1, mp, c) == 1.0);
}

TEST_CASE("packets: derivative, reflection, invariants") {
    WavePacket f(FourVector{0.4, -0.2}, 0.7);
    f.poly = LegPolynomial({{{1, 0}, cplx(1.0, 0.5)}, {{0, 2}, cplx(0.3, 0.0)}});
    f.shift = FourVector{0.3, 0.1};
    const FourVector k{0.1, 0.35};
    const double h = 1e-5;
    for (int mu = 0; mu < 2; ++mu) {
        FourVector kp = k;
        FourVector km = k;
        kp[mu] += h;
        km[mu] -= h;
        const cplx fd = (f(kp) - f(km)) / (2.0 * h);
        CHECK(std::abs(f.derivative(mu)(k) - fd) < 1e-8);
    }
    const WavePacket r = f.reflected_conjugate();
    CHECK(std::abs(r(k) - std::conj(f(-k))) < 1e-15);

    const std::vector<FourVector> pts{FourVector{2.0, 1.0}, FourVector{-1.5, 0.5}, FourVector{0.2, 0.3}};
    const auto q = invariant_map(pts);
    CHECK(q.entries.size() == 6);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(q.at(i, j) == doctest::Approx(minkowski_dot(pts[i], pts[j])));
}

TEST_CASE("Schwartz norms of a Gaussian against closed forms") {
    WavePacket g(FourVector{0.0}, 1.0);
    CHECK(schwartz_norm(g, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    // sup (1+k^2) e^{-k^2/2} = 2 e^{-1/2}
    CHECK(schwartz_norm(g, 0, 2) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-8));
    // sup |f'| = e^{-1/2} < sup f
    CHECK(schwartz_norm(g, 1, 0) == doctest::Approx(1.0).epsilon(1e-9));
    // sup |f''| = 1 at k = 0, sup (1+k^2)|f'| found numerically below
    double best = 0.0;
    for (double x = 0.0; x < 10.0; x += 1e-4) best = std::max(best, (1 + x * x) * x * std::exp(-0.5 * x * x));
    CHECK(schwartz_norm(g, 1, 2) == doctest::Approx(std::max(best, 2.0 * std::exp(-0.5))).epsilon(1e-6));
    // scaling is linear
    WavePacket g3 = g;
    g3.amplitude = 3.0;
    CHECK(schwartz_norm(g3, 1, 2) == doctest::Approx(3.0 * schwartz_norm(g, 1, 2)).epsilon(1e-12));
}

TEST_CASE("Fourier transform of a Gaussian") {
    auto f = [](double x) { return cplx(std::exp(-0.5 * x * x), 0.0); };
    for (double t : {0.0, 0.5, 1.0, 3.0}) {
        const Estimate e = fourier_1d(f, t, {-12.0, 12.0});
        CHECK(std::abs(e.value - std::exp(-0.5 * t * t)) < 1e-10);
    }
}

TEST_CASE("invalid parameters are rejected") {
    ModelParams p;
    p.m0 = 2.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.eps_phi = 1.5;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.d = 5;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

}
