#include "doctest.h"

#include "qftscat/fitter.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace qftscat;

namespace {

const ModelParams kModel{2, 1.0, 1.0, 0.5};

FitConfig config(double E_max, int train, int validate, std::uint64_t seed = 3) {
    FitConfig c;
    c.E_max = E_max;
    c.train_count = train;
    c.validate_count = validate;
    c.seed = seed;
    return c;
}

double forward_energy(const std::vector<ShellPoint>& pt) {
    double e = 0.0;
    for (const auto& p : pt)
        if (p.sign > 0) e += p.energy();
    return e;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("qftscat_fitter_" + name);
}

} // namespace

TEST_SUITE("fitter") {

TEST_CASE("emptiness rule agrees with the rest-frame energy bound") {
    for (int n = 3; n <= 7; ++n) {
        for (int r = 1; r < n; ++r) {
            for (double E : {1.5, 2.0, 2.5, 3.0, 3.5, 4.5, 10.0}) {
                // Conservation forces equal backward and forward energy sums, each at least its
                // leg count times m; a single leg on either side cannot share energy.
                const bool expect = r >= 2 && n - r >= 2 && E >= std::max(r, n - r);
                CHECK(qn_nonempty(n, r, E, 1.0) == expect);
            }
        }
    }
    FitConfig c = config(10.0, 10, 10);
    const PhaseSpaceSample s = sample_Qn(3, 1, c, kModel);
    CHECK(s.kinematically_empty);
    CHECK(s.points.empty());
    CHECK_FALSE(s.diagnostics.empty());
    const PhaseSpaceSample below = sample_Qn(4, 2, config(1.9, 10, 10), kModel);
    CHECK(below.kinematically_empty);
}

TEST_CASE("sampled points satisfy every defining constraint") {
    const FitConfig c = config(10.0, 300, 300);
    for (auto [n, r] : {std::pair{4, 2}, std::pair{5, 2}, std::pair{6, 3}}) {
        const PhaseSpaceSample s = sample_Qn(n, r, c, kModel);
        REQUIRE(s.points.size() == 600);
        double worst = 0.0;
        for (const auto& pt : s.points) {
            worst = std::max(worst, qn_constraint_residual(pt, r, c.E_max, 1.0));
            for (int l = 0; l < n; ++l) CHECK(pt[static_cast<std::size_t>(l)].sign == (l < r ? -1 : 1));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("constraint residual detects violations") {
    std::vector<ShellPoint> pt = {ShellPoint{{0.5}, 1.0, -1}, ShellPoint{{-0.5}, 1.0, -1}, ShellPoint{{0.5}, 1.0, 1},
                                  ShellPoint{{-0.5}, 1.0, 1}};
    CHECK(qn_constraint_residual(pt, 2, 10.0, 1.0) < 1e-14);
    CHECK(qn_constraint_residual(pt, 2, 2.0, 1.0) > 0.0);  // forward energy 2 sqrt(1.25) > 2
    pt[3].spatial = {-0.4};
    CHECK(qn_constraint_residual(pt, 2, 10.0, 1.0) > 0.05);
    pt[3].spatial = {-0.5};
    pt[0].sign = 1;
    CHECK(qn_constraint_residual(pt, 2, 10.0, 1.0) > 1.0);
}

TEST_CASE("sampler is deterministic in the seed and independent of the thread count") {
    FitConfig c = config(6.0, 200, 200, 42);
    const PhaseSpaceSample a = sample_Qn(5, 2, c, kModel);
    const PhaseSpaceSample b = sample_Qn(5, 2, c, kModel);
    c.threads = 3;
    const PhaseSpaceSample t = sample_Qn(5, 2, c, kModel);
    REQUIRE(a.points.size() == b.points.size());
    REQUIRE(a.points.size() == t.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        for (std::size_t l = 0; l < a.points[i].size(); ++l) {
            CHECK(a.points[i][l].spatial == b.points[i][l].spatial);
            CHECK(a.points[i][l].spatial == t.points[i][l].spatial);
        }
    }
    CHECK(a.attempts == t.attempts);
    c.seed = 43;
    const PhaseSpaceSample other = sample_Qn(5, 2, c, kModel);
    CHECK(other.points[0][0].spatial != a.points[0][0].spatial);
}

TEST_CASE("points cluster at threshold just above it") {
    const FitConfig c = config(2.05, 200, 200);
    const PhaseSpaceSample s = sample_Qn(4, 2, c, kModel);
    REQUIRE(s.points.size() == 400);
    for (const auto& pt : s.points) {
        const double e = forward_energy(pt);
        CHECK(e >= 2.0 - 1e-12);
        CHECK(e <= 2.05 + 1e-12);
        const auto k = std::vector<FourVector>{pt[2].momentum(), pt[3].momentum()};
        const FourVector total = k[0] + k[1];
        // Pair invariant mass squared between 4 m^2 and E_max^2.
        const double s2 = minkowski_dot(total, total);
        CHECK(s2 >= 4.0 - 1e-10);
        CHECK(s2 <= 2.05 * 2.05 + 1e-10);
        for (const auto& p : pt) CHECK(std::abs(p.spatial[0]) < 0.7);
    }
}

TEST_CASE("constant reference is fitted exactly at degree zero") {
    const FitConfig c = config(10.0, 100, 100);
    const PhaseSpaceSample s = sample_Qn(4, 2, c, kModel);
    ReferenceParams p;
    p.value = 2.75;
    const FitReport r = fit_polynomial(make_reference("constant", 4, p, 1.0), s, c);
    CHECK(r.pass);
    CHECK(r.degree_used == 0);
    CHECK(r.achieved_sup_error < 1e-13);
    CHECK(r.polynomial.total_degree() == 0);
}

TEST_CASE("planted quadratic is recovered at degree two") {
    const FitConfig c = config(4.0, 300, 300);
    const PhaseSpaceSample s = sample_Qn(4, 2, c, kModel);
    const FitReport r = fit_polynomial(make_reference("planted_quadratic", 4, {}, 1.0), s, c);
    CHECK(r.pass);
    CHECK(r.degree_used == 2);
    CHECK(r.achieved_sup_error < 1e-10);
    // Fresh points: the fit agrees with the planted polynomial everywhere on the region.
    const PhaseSpaceSample fresh = sample_Qn(4, 2, config(4.0, 100, 100, 99), kModel);
    const TransferPolynomial planted = planted_polynomial(4, 1.0);
    for (std::size_t i = 0; i < fresh.points.size(); ++i) {
        const auto k = fresh.momenta(i);
        CHECK(std::abs(r.polynomial(k) - planted(k)) < 1e-9);
    }
    TransferFamily fam;
    fam.members[4] = planted;
    CHECK(validate_transfer_family(fam).pass);
}

TEST_CASE("fitted polynomial is symmetric and real") {
    const FitConfig c = config(6.0, 400, 400);
    const PhaseSpaceSample s = sample_Qn(4, 2, c, kModel);
    const FitReport r = fit_polynomial(make_reference("exp_q12", 4, {}, 1.0), s, c);
    CHECK(r.history.size() >= 1);
    TransferFamily fam;
    fam.members[4] = r.polynomial;
    CHECK(validate_transfer_family(fam).pass);
    CHECK(hermiticity_identity_check(r.polynomial));
}

TEST_CASE("family assembly enforces the degree bound") {
    const FitConfig c = config(4.0, 200, 200);
    const PhaseSpaceSample s = sample_Qn(4, 2, c, kModel);
    std::map<int, FitReport> fits;
    fits[4] = fit_polynomial(make_reference("planted_quadratic", 4, {}, 1.0), s, c);
    const TransferFamily fam = build_family(fits, 8);
    CHECK(fam.member(2) == TransferPolynomial::constant(2, 1.0));
    CHECK(fam.member(4) == fits[4].polynomial);
    CHECK_THROWS_AS(build_family(fits, 1), InvalidArgument);
    fits[4].pass = false;
    CHECK_THROWS_AS(build_family(fits, 8), InvalidArgument);
}

TEST_CASE("fit configuration and references are validated") {
    FitConfig c;
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = FitConfig{};
    c.threads = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    CHECK_THROWS_AS(make_reference("nonsense", 4, {}, 1.0), InvalidArgument);
    CHECK(reference_names().size() == 4);
    const FitConfig small = config(4.0, 10, 10);
    const PhaseSpaceSample s = sample_Qn(4, 2, small, kModel);
    CHECK_THROWS_AS(make_fit_data(make_reference("constant", 4, {}, 1.0), s, config(4.0, 20, 20)), InvalidArgument);
}

TEST_CASE("tabulated reference values load and fit") {
    const FitConfig c = config(4.0, 150, 150);
    const PhaseSpaceSample s = sample_Qn(4, 2, c, kModel);
    const TransferPolynomial planted = planted_polynomial(4, 1.0);
    const auto path = temp_file("table.csv");
    {
        std::ofstream out(path);
        out << "q12,q13,q14,q23,q24,q34,value\n";
        out.precision(17);
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            const auto k = s.momenta(i);
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b) out << minkowski_dot(k[a], k[b]) << ",";
            out << planted(k).real() << "\n";
        }
    }
    const FitData data = load_table(path.string(), 4, c, 1.0);
    CHECK(data.train.size() == 150);
    CHECK(data.validate.size() == 150);
    const FitReport r = fit_polynomial(data, c);
    CHECK(r.pass);
    CHECK(r.degree_used == 2);

    const auto bad = temp_file("bad.csv");
    {
        std::ofstream out(bad);
        out << "q12,q13,q14,q23,q24,q34,value\n1,2,3,4,5,6,7\n1,2,x,4,5,6,7\n";
    }
    try {
        load_table(bad.string(), 4, c, 1.0);
        FAIL("malformed table accepted");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::filesystem::remove(path);
    std::filesystem::remove(bad);
}

}
