#pragma once

// On-shell phase-space integration with momentum conservation solved exactly.
//
// A set of p legs with prescribed shell signs must sum to a given total momentum.
// The spatial momenta of the first p-2 legs and the transverse components (2..d-1)
// of leg p-2 are free integration variables; the remaining longitudinal component
// of leg p-2 follows from energy conservation (two-body root) and leg p-1 from
// spatial conservation. Each solution carries the density
//   prod_l 1/(2 omega_l) * 1/|dE/dx|.

#include "qftscat/kinematics.hpp"
#include "qftscat/quadrature.hpp"

#include <algorithm>
#include <array>
#include <span>
#include <vector>

namespace qftscat::phase_space {

struct TwoBodyProblem {
    int sign_a = 1;
    int sign_b = 1;
    double A = 1.0;  // transverse mass of leg a
    double B = 1.0;  // transverse mass of leg b
    double c = 0.0;  // longitudinal momentum to share
    double E = 0.0;  // energy to share
};

struct TwoBodyRoot {
    double x = 0.0;      // longitudinal momentum of leg a
    double slope = 0.0;  // |d(energy sum)/dx| at the root
};

// Solutions of sign_a*sqrt(x^2+A^2) + sign_b*sqrt((c-x)^2+B^2) = E. Returns the root count.
int solve_two_body(const TwoBodyProblem& pb, std::array<TwoBodyRoot, 2>& roots, double tol = 1e-12);

inline constexpr int kMaxFree = 16;

class ShellConstraint {
public:
    // legs: positions (into the caller's momentum array) of the constrained legs. The legs
    // may be reordered so that the two solved last share a shell sign.
    ShellConstraint(int dim, double mass, std::vector<int> legs, std::vector<int> signs, double root_tol = 1e-12);

    int free_dimension() const { return free_dim_; }
    int dim() const { return dim_; }
    // Leg position and spatial component carried by free coordinate i.
    std::pair<int, int> coordinate(int i) const;
    const std::vector<int>& legs() const { return legs_; }
    const std::vector<int>& signs() const { return signs_; }

    // Fills momenta for every solution at the given free coordinates and calls
    // visit(density) with momenta populated. Returns the number of solutions.
    template <class Visit>
    int solve(const double* free, const FourVector& total, std::span<FourVector> momenta, Visit&& visit) const;

    int count(const double* free, const FourVector& total) const;

private:
    int dim_;
    double mass_;
    std::vector<int> legs_;
    std::vector<int> signs_;
    double root_tol_;
    int free_dim_;
};

template <class Visit>
int ShellConstraint::solve(const double* free, const FourVector& total, std::span<FourVector> momenta,
                           Visit&& visit) const {
    const int p = static_cast<int>(legs_.size());
    const int sd = dim_ - 1;
    FourVector rest = total;
    double density = 1.0;
    for (int i = 0; i < p - 2; ++i) {
        FourVector& k = momenta[legs_[i]];
        k = FourVector(dim_);
        double w2 = mass_ * mass_;
        for (int c = 1; c <= sd; ++c) {
            k[c] = free[sd * i + c - 1];
            w2 += k[c] * k[c];
        }
        const double w = std::sqrt(w2);
        k[0] = signs_[i] * w;
        density /= 2.0 * w;
        rest -= k;
    }
    const int a = legs_[p - 2];
    const int b = legs_[p - 1];
    FourVector& ka = momenta[a];
    FourVector& kb = momenta[b];
    ka = FourVector(dim_);
    kb = FourVector(dim_);
    double a2 = mass_ * mass_;
    double b2 = mass_ * mass_;
    for (int c = 2; c <= sd; ++c) {
        const double y = free[sd * (p - 2) + c - 2];
        ka[c] = y;
        kb[c] = rest[c] - y;
        a2 += y * y;
        b2 += kb[c] * kb[c];
    }
    TwoBodyProblem pb{signs_[p - 2], signs_[p - 1], std::sqrt(a2), std::sqrt(b2), rest[1], rest[0]};
    std::array<TwoBodyRoot, 2> roots{};
    const int nr = solve_two_body(pb, roots, root_tol_);
    for (int r = 0; r < nr; ++r) {
        const double x = roots[r].x;
        const double wa = std::hypot(x, pb.A);
        const double wb = std::hypot(pb.c - x, pb.B);
        ka[1] = x;
        ka[0] = pb.sign_a * wa;
        kb[1] = pb.c - x;
        kb[0] = pb.sign_b * wb;
        visit(density / (4.0 * wa * wb * roots[r].slope));
    }
    return nr;
}

namespace detail {

// Breakpoints where the solution count changes along [lo, hi], found by a scan plus bisection.
template <class Count>
std::vector<double> breakpoints(Count&& count, double lo, double hi, int scan) {
    std::vector<double> pts{lo};
    int prev = count(lo);
    double prev_x = lo;
    for (int i = 1; i < scan; ++i) {
        const double x = i == scan - 1 ? hi : lo + (hi - lo) * i / (scan - 1);
        const int cur = count(x);
        if (cur != prev) {
            double a = prev_x;
            double b = x;
            for (int it = 0; it < 60 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
                const double mid = 0.5 * (a + b);
                (count(mid) == prev ? a : b) = mid;
            }
            pts.push_back(0.5 * (a + b));
        }
        prev = cur;
        prev_x = x;
    }
    pts.push_back(hi);
    return pts;
}

template <class F>
struct NestedIntegrator {
    const ShellConstraint& constraint;
    const FourVector& total;
    std::span<const Interval> boxes;
    std::span<FourVector> momenta;
    F& integrand;
    const QuadratureSettings& settings;
    double rel_tol;
    double abs_tol;
    std::array<double, kMaxFree> free{};

    cplx point() {
        cplx s{0.0, 0.0};
        constraint.solve(free.data(), total, momenta, [&](double density) {
            s += density * integrand(std::span<const FourVector>(momenta.data(), momenta.size()));
        });
        return s;
    }

    Estimate level(int lv) {
        const int nfree = constraint.free_dimension();
        if (nfree == 0) {
            const cplx v = point();
            return {v, 0.0, std::abs(v)};
        }
        const double tol = std::max(rel_tol * std::pow(0.2, lv), 1e-13);
        const Interval box = boxes[lv];
        const double atol = quad::level_abs_tol(abs_tol, boxes, lv);
        if (lv == nfree - 1) {
            auto count = [&](double x) {
                free[lv] = x;
                return constraint.count(free.data(), total);
            };
            const auto pts = breakpoints(count, box.lo, box.hi, settings.scan_points);
            Estimate sum;
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                const double a = pts[i];
                const double b = pts[i + 1];
                if (!(b > a)) continue;
                if (count(0.5 * (a + b)) == 0 && count(a + 0.25 * (b - a)) == 0 && count(b - 0.25 * (b - a)) == 0)
                    continue;
                sum += quad::adaptive_endpoint(
                    [&](double x) {
                        free[lv] = x;
                        return point();
                    },
                    a, b, tol, settings.max_depth, atol);
            }
            return sum;
        }
        return quad::adaptive(
            [&](double x) {
                const double keep = free[lv];
                free[lv] = x;
                const cplx v = level(lv + 1).value;
                free[lv] = keep;
                return v;
            },
            box.lo, box.hi, tol, settings.max_depth, atol);
    }
};

} // namespace detail

// Integrates integrand(momenta) over the constrained on-shell configurations.
// boxes[i] bounds free coordinate i; momenta is the caller's full leg array
// (legs outside the constraint are left untouched).
template <class F>
Estimate integrate(const ShellConstraint& constraint, const FourVector& total, std::span<const Interval> boxes,
                   std::span<FourVector> momenta, F&& integrand, const QuadratureSettings& settings,
                   double rel_tol, double abs_tol = 0.0) {
    for (int i = 0; i < constraint.free_dimension(); ++i)
        if (boxes[i].empty()) return {};
    detail::NestedIntegrator<std::remove_reference_t<F>> ni{constraint, total,    boxes,  momenta,
                                                            integrand,  settings, rel_tol, abs_tol, {}};
    return ni.level(0);
}

} // namespace qftscat::phase_space
