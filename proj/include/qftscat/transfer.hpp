#pragma once

#include "qftscat/kinematics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qftscat {

// Polynomial in the invariant coordinates q_ij = k_i.k_j (i <= j) of n momenta.
// Exponent vectors are indexed like InvariantVector entries.
class TransferPolynomial {
public:
    using Exponents = std::vector<int>;

    TransferPolynomial() = default;
    explicit TransferPolynomial(int n) : n_(n) {}
    static TransferPolynomial constant(int n, double c);
    // Single monomial c * q_{i,j} with 0-based i, j.
    static TransferPolynomial monomial(int n, int i, int j, cplx c = 1.0);

    int n() const { return n_; }
    const std::map<Exponents, cplx>& terms() const { return terms_; }
    void add_term(const Exponents& e, cplx c);

    cplx evaluate(const InvariantVector& q) const;
    cplx operator()(std::span<const FourVector> momenta) const;
    // Max over legs of the degree in that leg's momentum (q_ii counts 2, q_ij counts 1 for each).
    int per_argument_degree() const;
    int total_degree() const;

    TransferPolynomial operator+(const TransferPolynomial& o) const;
    TransferPolynomial scaled(cplx c) const;
    // Action of a permutation of the legs: argument l is moved to sigma[l].
    TransferPolynomial permuted(std::span<const int> sigma) const;

    bool operator==(const TransferPolynomial& o) const { return n_ == o.n_ && terms_ == o.terms_; }

private:
    int n_ = 0;
    std::map<Exponents, cplx> terms_;
};

cplx eval_M(const TransferPolynomial& p, std::span<const FourVector> momenta);

struct TransferFamily {
    std::map<int, TransferPolynomial> members;
    int L_max = 8;

    // Member of order n; orders without an entry are the constant 1.
    TransferPolynomial member(int n) const;
};

struct Violation {
    std::string clause;   // symmetry, reality, order or degree
    std::string message;
    std::string witness;  // permutation or coefficient that fails
};

struct ValidationReport {
    bool pass = true;
    std::vector<Violation> violations;
};

ValidationReport validate_transfer_family(const TransferFamily& fam, std::uint64_t seed = 7);
// Average over all leg permutations; imaginary parts dropped.
TransferPolynomial symmetrize_realify(const TransferPolynomial& p);
// conj M(-k_n, ..., -k_1) == M(k_1, ..., k_n) at random momenta, to 1e-12.
bool hermiticity_identity_check(const TransferPolynomial& p, int samples = 100, std::uint64_t seed = 11, int d = 2);

// Invariant-coordinate names: q12 for 1-based (1,2); q1_10 style once an index exceeds 9.
std::string invariant_name(int i, int j);
std::optional<std::pair<int, int>> parse_invariant_name(const std::string& s);

} // namespace qftscat
