#include "doctest.h"

#include "qftscat/config.hpp"
#include "qftscat/transfer.hpp"

#include <algorithm>
#include <numeric>
#include <random>

using namespace qftscat;

namespace {

std::vector<FourVector> random_momenta(std::mt19937_64& rng, int n, int d = 2) {
    std::normal_distribution<double> g(0.0, 1.5);
    std::vector<FourVector> k;
    for (int l = 0; l < n; ++l) {
        FourVector v(d);
        for (int c = 0; c < d; ++c) v[c] = g(rng);
        k.push_back(v);
    }
    return k;
}

bool has_clause(const ValidationReport& r, const std::string& clause) {
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation& v) { return v.clause == clause; });
}

TransferPolynomial cubic_mix(int n) {
    TransferPolynomial p(n);
    std::vector<int> e(InvariantVector::size_for(n), 0);
    e[InvariantVector::index(0, 1)] = 2;
    e[InvariantVector::index(1, 2)] = 1;
    p.add_term(e, cplx(0.75, -0.5));
    std::vector<int> f(InvariantVector::size_for(n), 0);
    f[InvariantVector::index(0, 0)] = 1;
    p.add_term(f, cplx(-1.25, 0.0));
    p.add_term(std::vector<int>(InvariantVector::size_for(n), 0), cplx(0.3, 0.0));
    return p;
}

} // namespace

TEST_SUITE("transfer") {

TEST_CASE("evaluation matches the invariants computed by hand") {
    std::mt19937_64 rng(3);
    const auto k = random_momenta(rng, 3);
    const TransferPolynomial p = cubic_mix(3);
    const double q12 = minkowski_dot(k[0], k[1]);
    const double q23 = minkowski_dot(k[1], k[2]);
    const double q11 = minkowski_dot(k[0], k[0]);
    const cplx expect = cplx(0.75, -0.5) * q12 * q12 * q23 - 1.25 * q11 + 0.3;
    CHECK(std::abs(p(k) - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
    CHECK(p.total_degree() == 3);
    CHECK(p.per_argument_degree() == 3);  // leg 2 appears in q12^2 and q23
}

TEST_CASE("permuting the polynomial permutes its arguments") {
    std::mt19937_64 rng(5);
    const TransferPolynomial p = cubic_mix(4);
    std::vector<int> sigma = {2, 0, 3, 1};
    const TransferPolynomial q = p.permuted(sigma);
    for (int trial = 0; trial < 10; ++trial) {
        const auto k = random_momenta(rng, 4);
        std::vector<FourVector> moved(4);
        for (int l = 0; l < 4; ++l) moved[sigma[l]] = k[l];
        CHECK(std::abs(q(moved) - p(k)) < 1e-10 * std::max(1.0, std::abs(p(k))));
    }
}

TEST_CASE("symmetrized polynomial is permutation invariant and real") {
    std::mt19937_64 rng(9);
    const TransferPolynomial s = symmetrize_realify(cubic_mix(4));
    for (const auto& [e, c] : s.terms()) CHECK(c.imag() == 0.0);
    std::vector<int> sigma = {0, 1, 2, 3};
    const auto k = random_momenta(rng, 4);
    const cplx base = s(k);
    do {
        std::vector<FourVector> moved(4);
        for (int l = 0; l < 4; ++l) moved[l] = k[sigma[l]];
        CHECK(std::abs(s(moved) - base) < 1e-10 * std::max(1.0, std::abs(base)));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    TransferFamily fam;
    fam.members[4] = s;
    CHECK(validate_transfer_family(fam).pass);
    CHECK(hermiticity_identity_check(s));
}

TEST_CASE("condition violations are reported with their clause and witness") {
    TransferFamily fam;
    fam.members[3] = TransferPolynomial::monomial(3, 0, 1);
    auto rep = validate_transfer_family(fam);
    CHECK_FALSE(rep.pass);
    CHECK(has_clause(rep, "symmetry"));
    CHECK_FALSE(rep.violations.front().witness.empty());

    fam.members.clear();
    fam.members[3] = TransferPolynomial::constant(3, 1.0) + TransferPolynomial::constant(3, 1.0).scaled(cplx(0.0, 0.5));
    rep = validate_transfer_family(fam);
    CHECK(has_clause(rep, "reality"));

    fam.members.clear();
    fam.members[2] = TransferPolynomial::constant(2, 2.0);
    CHECK(has_clause(validate_transfer_family(fam), "reality"));

    fam.members.clear();
    fam.members[4] = TransferPolynomial::constant(3, 1.0);
    CHECK(has_clause(validate_transfer_family(fam), "order"));

    fam.members.clear();
    fam.L_max = 2;
    TransferPolynomial high = symmetrize_realify(cubic_mix(3));
    fam.members[3] = high;
    rep = validate_transfer_family(fam);
    CHECK(has_clause(rep, "degree"));
    CHECK_FALSE(rep.violations.back().witness.empty());

    fam.L_max = 3;
    CHECK(validate_transfer_family(fam).pass);
}

TEST_CASE("hermiticity identity holds for real symmetric polynomials only") {
    CHECK(hermiticity_identity_check(TransferPolynomial::constant(3, 2.0)));
    CHECK(hermiticity_identity_check(symmetrize_realify(TransferPolynomial::monomial(5, 1, 3)), 50, 11, 4));
    CHECK_FALSE(hermiticity_identity_check(TransferPolynomial::constant(3, 1.0).scaled(cplx(0.0, 1.0))));
}

TEST_CASE("invariant names round trip") {
    CHECK(invariant_name(0, 1) == "q12");
    CHECK(invariant_name(2, 2) == "q33");
    CHECK(invariant_name(3, 11) == "q4_12");
    for (int i = 0; i < 12; ++i)
        for (int j = i; j < 12; ++j) {
            const auto parsed = parse_invariant_name(invariant_name(i, j));
            REQUIRE(parsed.has_value());
            CHECK(parsed->first == i);
            CHECK(parsed->second == j);
        }
    CHECK_FALSE(parse_invariant_name("x12").has_value());
    CHECK_FALSE(parse_invariant_name("q1").has_value());
}

TEST_CASE("polynomial JSON round trip is bit exact") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    TransferPolynomial p(4);
    for (int t = 0; t < 12; ++t) {
        std::vector<int> e(InvariantVector::size_for(4), 0);
        e[rng() % e.size()] = 1 + static_cast<int>(rng() % 3);
        e[rng() % e.size()] += 1;
        p.add_term(e, cplx(u(rng) / 7.0, t % 3 == 0 ? u(rng) : 0.0));
    }
    const json j = polynomial_to_json(p);
    const TransferPolynomial back = polynomial_from_json(json::parse(j.dump()));
    CHECK(back == p);
    CHECK(polynomial_to_json(back).dump() == j.dump());
    CHECK_THROWS_AS(polynomial_from_json(json::parse(R"({"n": 3, "terms": [{"degrees": {"q19": 1}, "coeff": 1}]})")),
                    InvalidArgument);
}

}
