#include "qftscat/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace qftscat {

namespace {

std::string permutation_text(std::span<const int> sigma) {
    // Cycle notation, 1-based, fixed points omitted.
    std::vector<bool> seen(sigma.size(), false);
    std::ostringstream os;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (seen[i] || sigma[i] == static_cast<int>(i)) continue;
        os << '(';
        std::size_t j = i;
        bool first = true;
        while (!seen[j]) {
            seen[j] = true;
            os << (first ? "" : " ") << j + 1;
            first = false;
            j = static_cast<std::size_t>(sigma[j]);
        }
        os << ')';
    }
    return os.str();
}

std::string monomial_text(int n, const TransferPolynomial::Exponents& e) {
    std::ostringstream os;
    bool any = false;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
            const int p = e[InvariantVector::index(i, j)];
            if (p == 0) continue;
            os << (any ? "*" : "") << invariant_name(i, j);
            if (p > 1) os << '^' << p;
            any = true;
        }
    return any ? os.str() : "1";
}

double max_abs_coeff(const TransferPolynomial& p) {
    double m = 0.0;
    for (const auto& [e, c] : p.terms()) m = std::max(m, std::abs(c));
    return m;
}

bool nearly_equal(const TransferPolynomial& a, const TransferPolynomial& b, double tol) {
    const double scale = std::max({max_abs_coeff(a), max_abs_coeff(b), 1e-300});
    auto covered = [&](const TransferPolynomial& x, const TransferPolynomial& y) {
        for (const auto& [e, c] : x.terms()) {
            auto it = y.terms().find(e);
            const cplx other = it == y.terms().end() ? cplx(0.0, 0.0) : it->second;
            if (std::abs(c - other) > tol * scale) return false;
        }
        return true;
    };
    return covered(a, b) && covered(b, a);
}

FourVector random_vector(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> g(0.0, 1.0);
    FourVector k(d);
    for (int c = 0; c < d; ++c) k[c] = g(rng);
    return k;
}

} // namespace

TransferPolynomial TransferPolynomial::constant(int n, double c) {
    TransferPolynomial p(n);
    p.add_term(Exponents(InvariantVector::size_for(n), 0), c);
    return p;
}

TransferPolynomial TransferPolynomial::monomial(int n, int i, int j, cplx c) {
    TransferPolynomial p(n);
    Exponents e(InvariantVector::size_for(n), 0);
    e[InvariantVector::index(i, j)] = 1;
    p.add_term(e, c);
    return p;
}

void TransferPolynomial::add_term(const Exponents& e, cplx c) {
    if (e.size() != InvariantVector::size_for(n_)) throw InvalidArgument("exponent vector has wrong length");
    for (int x : e)
        if (x < 0) throw InvalidArgument("negative exponent");
    cplx& slot = terms_[e];
    slot += c;
    if (slot == cplx(0.0, 0.0)) terms_.erase(e);
}

cplx TransferPolynomial::evaluate(const InvariantVector& q) const {
    if (q.n != n_) {
        throw InvalidArgument("transfer polynomial of order " + std::to_string(n_) + " evaluated on " +
                              std::to_string(q.n) + " momenta");
    }
    cplx s{0.0, 0.0};
    for (const auto& [e, c] : terms_) {
        double prod = 1.0;
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int p = 0; p < e[i]; ++p) prod *= q.entries[i];
        s += c * prod;
    }
    return s;
}

cplx TransferPolynomial::operator()(std::span<const FourVector> momenta) const {
    return evaluate(invariant_map(momenta));
}

int TransferPolynomial::per_argument_degree() const {
    int best = 0;
    for (const auto& [e, c] : terms_) {
        for (int l = 0; l < n_; ++l) {
            int deg = 0;
            for (int j = 0; j < n_; ++j) {
                const int p = e[InvariantVector::index(l, j)];
                deg += (j == l ? 2 : 1) * p;
            }
            best = std::max(best, deg);
        }
    }
    return best;
}

int TransferPolynomial::total_degree() const {
    int best = 0;
    for (const auto& [e, c] : terms_) best = std::max(best, std::accumulate(e.begin(), e.end(), 0));
    return best;
}

TransferPolynomial TransferPolynomial::operator+(const TransferPolynomial& o) const {
    if (o.n_ != n_) throw InvalidArgument("adding transfer polynomials of different order");
    TransferPolynomial out = *this;
    for (const auto& [e, c] : o.terms_) out.add_term(e, c);
    return out;
}

TransferPolynomial TransferPolynomial::scaled(cplx c) const {
    TransferPolynomial out(n_);
    for (const auto& [e, v] : terms_) out.add_term(e, c * v);
    return out;
}

TransferPolynomial TransferPolynomial::permuted(std::span<const int> sigma) const {
    if (static_cast<int>(sigma.size()) != n_) throw InvalidArgument("permutation length mismatch");
    TransferPolynomial out(n_);
    for (const auto& [e, c] : terms_) {
        Exponents ne(e.size(), 0);
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i <= j; ++i) ne[InvariantVector::index(sigma[i], sigma[j])] += e[InvariantVector::index(i, j)];
        out.add_term(ne, c);
    }
    return out;
}

cplx eval_M(const TransferPolynomial& p, std::span<const FourVector> momenta) { return p(momenta); }

TransferPolynomial TransferFamily::member(int n) const {
    auto it = members.find(n);
    if (it != members.end()) return it->second;
    return TransferPolynomial::constant(n, 1.0);
}

ValidationReport validate_transfer_family(const TransferFamily& fam, std::uint64_t seed) {
    ValidationReport rep;
    auto fail = [&](std::string clause, std::string msg, std::string witness) {
        rep.pass = false;
        rep.violations.push_back({std::move(clause), std::move(msg), std::move(witness)});
    };
    std::mt19937_64 rng(seed);
    for (const auto& [n, p] : fam.members) {
        const std::string tag = "M_" + std::to_string(n);
        if (p.n() != n) {
            fail("order", tag + " stored with order " + std::to_string(p.n()), "");
            continue;
        }
        // Structural symmetry: invariance under adjacent transpositions generates S_n.
        for (int i = 0; i + 1 < n; ++i) {
            std::vector<int> sigma(n);
            std::iota(sigma.begin(), sigma.end(), 0);
            std::swap(sigma[i], sigma[i + 1]);
            if (!nearly_equal(p.permuted(sigma), p, 1e-12)) {
                fail("symmetry", tag + " is not symmetric under permutation of arguments", permutation_text(sigma));
                break;
            }
        }
        // Randomized evaluation check of the symmetry.
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<FourVector> k;
            for (int l = 0; l < n; ++l) k.push_back(random_vector(rng, 2));
            std::vector<int> sigma(n);
            std::iota(sigma.begin(), sigma.end(), 0);
            std::shuffle(sigma.begin(), sigma.end(), rng);
            std::vector<FourVector> ks(n);
            for (int l = 0; l < n; ++l) ks[l] = k[sigma[l]];
            const cplx a = p(k);
            const cplx b = p(ks);
            if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a))) {
                fail("symmetry", tag + " changes value under argument permutation", permutation_text(sigma));
                break;
            }
        }
        // Real coefficients, M_2 = 1.
        for (const auto& [e, c] : p.terms()) {
            if (c.imag() != 0.0) {
                std::ostringstream os;
                os << monomial_text(n, e) << " coeff " << c;
                fail("reality", tag + " has a complex coefficient", os.str());
                break;
            }
        }
        if (n == 2 && !(p == TransferPolynomial::constant(2, 1.0))) fail("reality", "M_2 must be the constant 1", "");
        // Degree bound.
        if (p.per_argument_degree() > fam.L_max) {
            std::string witness;
            for (const auto& [e, c] : p.terms()) {
                TransferPolynomial single(n);
                single.add_term(e, c);
                if (single.per_argument_degree() > fam.L_max) {
                    witness = monomial_text(n, e);
                    break;
                }
            }
            fail("degree",
                 tag + " per-argument degree " + std::to_string(p.per_argument_degree()) + " exceeds L_max " +
                     std::to_string(fam.L_max),
                 witness);
        }
    }
    return rep;
}

TransferPolynomial symmetrize_realify(const TransferPolynomial& p) {
    const int n = p.n();
    if (n > 8) throw InvalidArgument("symmetrization supports n <= 8");
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::map<TransferPolynomial::Exponents, double> acc;
    long count = 0;
    do {
        const TransferPolynomial q = p.permuted(sigma);
        for (const auto& [e, c] : q.terms()) acc[e] += c.real();
        ++count;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    TransferPolynomial out(n);
    for (const auto& [e, c] : acc) {
        const double v = c / static_cast<double>(count);
        if (v != 0.0) out.add_term(e, v);
    }
    return out;
}

bool hermiticity_identity_check(const TransferPolynomial& p, int samples, std::uint64_t seed, int d) {
    std::mt19937_64 rng(seed);
    const int n = p.n();
    for (int s = 0; s < samples; ++s) {
        std::vector<FourVector> k;
        for (int l = 0; l < n; ++l) k.push_back(random_vector(rng, d));
        std::vector<FourVector> rev;
        for (int l = n - 1; l >= 0; --l) rev.push_back(-k[l]);
        const cplx lhs = std::conj(p(rev));
        const cplx rhs = p(k);
        if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(rhs))) return false;
    }
    return true;
}

std::string invariant_name(int i, int j) {
    if (i > j) std::swap(i, j);
    if (j + 1 <= 9) return "q" + std::to_string(i + 1) + std::to_string(j + 1);
    return "q" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

std::optional<std::pair<int, int>> parse_invariant_name(const std::string& s) {
    if (s.size() < 3 || s[0] != 'q') return std::nullopt;
    const std::string body = s.substr(1);
    int i = 0;
    int j = 0;
    const auto us = body.find('_');
    try {
        if (us != std::string::npos) {
            i = std::stoi(body.substr(0, us));
            j = std::stoi(body.substr(us + 1));
        } else {
            if (body.size() != 2 || !std::isdigit(body[0]) || !std::isdigit(body[1])) return std::nullopt;
            i = body[0] - '0';
            j = body[1] - '0';
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (i < 1 || j < 1) return std::nullopt;
    if (i > j) std::swap(i, j);
    return std::make_pair(i - 1, j - 1);
}

} // namespace qftscat
