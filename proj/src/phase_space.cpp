#include "qftscat/phase_space.hpp"

#include <cmath>
#include <sstream>

namespace qftscat::phase_space {

namespace {

double residual(const TwoBodyProblem& pb, double x) {
    return pb.sign_a * std::hypot(x, pb.A) + pb.sign_b * std::hypot(pb.c - x, pb.B) - pb.E;
}

double slope(const TwoBodyProblem& pb, double x) {
    return pb.sign_a * x / std::hypot(x, pb.A) - pb.sign_b * (pb.c - x) / std::hypot(pb.c - x, pb.B);
}

} // namespace

int solve_two_body(const TwoBodyProblem& pb, std::array<TwoBodyRoot, 2>& roots, double tol) {
    // Squaring twice gives (E^2-c^2) x^2 + c(alpha-2E^2) x + E^2(c^2+B^2) - alpha^2/4 = 0,
    // alpha = E^2 + c^2 + B^2 - A^2; candidates are then checked against the unsquared equation.
    const double E2 = pb.E * pb.E;
    const double c2 = pb.c * pb.c;
    const double alpha = E2 + c2 + pb.B * pb.B - pb.A * pb.A;
    const double qa = E2 - c2;
    const double qb = pb.c * (alpha - 2.0 * E2);
    const double qc = E2 * (c2 + pb.B * pb.B) - 0.25 * alpha * alpha;
    const double scale = E2 + c2 + pb.A * pb.A + pb.B * pb.B;

    std::array<double, 2> cand{};
    int nc = 0;
    if (std::abs(qa) <= 1e-14 * scale) {
        if (qb != 0.0) cand[nc++] = -qc / qb;
    } else {
        double disc = qb * qb - 4.0 * qa * qc;
        const double disc_scale = qb * qb + std::abs(4.0 * qa * qc);
        if (disc < 0.0) {
            if (disc < -1e-13 * disc_scale) return 0;
            disc = 0.0;
        }
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
        if (q != 0.0) {
            cand[nc++] = q / qa;
            cand[nc++] = qc / q;
        } else {
            cand[nc++] = 0.0;
        }
    }

    int nr = 0;
    for (int i = 0; i < nc; ++i) {
        double x = cand[i];
        const double size = std::abs(pb.E) + std::hypot(x, pb.A) + std::hypot(pb.c - x, pb.B);
        double f = residual(pb, x);
        // Spurious roots of the squared equation miss by O(size); genuine ones by rounding.
        if (std::abs(f) > 1e-6 * size) continue;
        for (int it = 0; it < 4 && std::abs(f) > tol * size; ++it) {
            const double d = slope(pb, x);
            if (std::abs(d) < 1e-12) break;
            x -= f / d;
            f = residual(pb, x);
        }
        if (std::abs(f) > tol * size) {
            // Near a threshold the slope vanishes and Newton cannot polish; accept a looser
            // residual there, fail otherwise.
            if (std::abs(slope(pb, x)) > 1e-6) {
                std::ostringstream os;
                os << "two-body root did not converge: residual " << f << " (E=" << pb.E << ", c=" << pb.c
                   << ", A=" << pb.A << ", B=" << pb.B << ", bracket candidate " << cand[i] << ")";
                throw RootFindingError(os.str());
            }
        }
        const double s = std::abs(slope(pb, x));
        if (s < 1e-14) continue;  // tangent solution: measure zero
        bool dup = false;
        for (int j = 0; j < nr; ++j) dup = dup || std::abs(roots[j].x - x) <= 1e-12 * (1.0 + std::abs(x));
        if (dup) continue;
        roots[nr++] = TwoBodyRoot{x, s};
    }
    return nr;
}

ShellConstraint::ShellConstraint(int dim, double mass, std::vector<int> legs, std::vector<int> signs, double root_tol)
    : dim_(dim), mass_(mass), legs_(std::move(legs)), signs_(std::move(signs)), root_tol_(root_tol) {
    if (legs_.size() != signs_.size()) throw InvalidArgument("shell constraint: legs and signs differ in length");
    if (legs_.size() < 2) throw InvalidArgument("shell constraint needs at least two legs");
    if (dim_ < 2 || dim_ > kMaxDim) throw InvalidArgument("shell constraint: dimension must be 2..4");
    for (int s : signs_)
        if (s != 1 && s != -1) throw InvalidArgument("shell constraint: signs must be +1 or -1");
    // Solve for a same-sign pair when there is one: opposite-sign roots can run off to
    // infinity at finite free coordinates, which the quadrature resolves badly.
    const int p = static_cast<int>(legs_.size());
    if (signs_[p - 2] != signs_[p - 1]) {
        for (int a = 0; a < p; ++a) {
            bool moved = false;
            for (int b = a + 1; b < p && !moved; ++b) {
                if (signs_[a] != signs_[b]) continue;
                std::vector<int> order;
                for (int l = 0; l < p; ++l)
                    if (l != a && l != b) order.push_back(l);
                order.push_back(a);
                order.push_back(b);
                std::vector<int> nl;
                std::vector<int> ns;
                for (int l : order) {
                    nl.push_back(legs_[l]);
                    ns.push_back(signs_[l]);
                }
                legs_ = std::move(nl);
                signs_ = std::move(ns);
                moved = true;
            }
            if (moved) break;
        }
    }
    free_dim_ = (dim_ - 1) * (p - 2) + (dim_ - 2);
    if (free_dim_ > kMaxFree) throw InvalidArgument("shell constraint: too many free coordinates");
}

std::pair<int, int> ShellConstraint::coordinate(int i) const {
    const int sd = dim_ - 1;
    const int p = static_cast<int>(legs_.size());
    if (i < sd * (p - 2)) return {legs_[i / sd], 1 + i % sd};
    return {legs_[p - 2], 2 + (i - sd * (p - 2))};
}

int ShellConstraint::count(const double* free, const FourVector& total) const {
    std::array<FourVector, 8> scratch{};
    std::vector<FourVector> big;
    std::span<FourVector> mom;
    int maxleg = 0;
    for (int l : legs_) maxleg = std::max(maxleg, l);
    if (maxleg < 8) {
        mom = std::span<FourVector>(scratch.data(), scratch.size());
    } else {
        big.resize(maxleg + 1);
        mom = big;
    }
    return solve(free, total, mom, [](double) {});
}

} // namespace qftscat::phase_space
