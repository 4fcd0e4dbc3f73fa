#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace qftscat {

using cplx = std::complex<double>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool empty() const { return !(hi > lo); }
};

// Value of an integral plus an error estimate (absolute).
struct Estimate {
    cplx value{0.0, 0.0};
    double error = 0.0;
    double l1 = 0.0;  // integral of |integrand|, the scale the error is judged against

    Estimate& operator+=(const Estimate& o) {
        value += o.value;
        error += o.error;
        l1 += o.l1;
        return *this;
    }
    friend Estimate operator+(Estimate a, const Estimate& b) { return a += b; }
    friend Estimate operator*(cplx c, const Estimate& e) {
        return {c * e.value, std::abs(c) * e.error, std::abs(c) * e.l1};
    }
};

struct QuadratureSettings {
    double rel_tol = 1e-8;      // adaptive Gauss-Kronrod relative tolerance (outermost level)
    unsigned max_depth = 14;    // bisection depth per adaptive integral
    double box_widths = 12.0;   // packet truncation radius in widths
    int scan_points = 64;       // breakpoint scan along the innermost free coordinate
    int fold_panels = 32;       // minimum panel count for oscillatory fold grids
    double root_tol = 1e-12;    // relative residual accepted for kinematic roots
    double fail_tol = 1e-4;     // relative error estimate above which a result is rejected

    // Doubles every resolution knob; used by refinement checks.
    QuadratureSettings refined() const {
        QuadratureSettings s = *this;
        s.rel_tol *= 0.125;
        s.max_depth += 2;
        s.scan_points *= 2;
        s.fold_panels *= 2;
        return s;
    }
};

namespace quad {

// Globally adaptive 15-point Gauss-Kronrod: the panel with the largest error is bisected
// until the summed error meets rel_tol against max(|I|, 1e-3 * L1), or falls below abs_tol.
// depth caps the panel count at 32 * depth.
template <class F>
Estimate adaptive(F&& f, double a, double b, double rel_tol, unsigned depth, double abs_tol = 0.0) {
    if (!(b > a)) return {};
    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    struct Panel {
        double lo, hi;
        cplx value;
        double error, l1;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto g = [&](double x) -> cplx { return cplx(f(x)); };
    auto panel = [&](double lo, double hi) {
        double err = 0.0;
        double l1 = 0.0;
        const cplx v = Rule::integrate(g, lo, hi, 0, 0.0, &err, &l1);
        return Panel{lo, hi, v, err, l1};
    };
    std::vector<Panel> heap;
    constexpr int kStart = 4;
    for (int i = 0; i < kStart; ++i) heap.push_back(panel(a + (b - a) * i / kStart, a + (b - a) * (i + 1) / kStart));
    std::make_heap(heap.begin(), heap.end());
    const std::size_t max_panels = std::max<std::size_t>(kStart, 32u * depth);
    auto totals = [&] {
        Estimate e;
        for (const Panel& p : heap) e += Estimate{p.value, p.error, p.l1};
        return e;
    };
    Estimate e = totals();
    while (heap.size() < max_panels) {
        if (e.error <= std::max(rel_tol * std::max(std::abs(e.value), 1e-3 * e.l1), abs_tol)) break;
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end());
            break;
        }
        for (const Panel& p : {panel(worst.lo, mid), panel(mid, worst.hi)}) {
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end());
        }
        e = totals();
    }
    return e;
}

// Same, after x = a + (b-a)(1-cos(pi u))/2, which tames inverse-square-root endpoint behaviour.
template <class F>
Estimate adaptive_endpoint(F&& f, double a, double b, double rel_tol, unsigned depth, double abs_tol = 0.0) {
    if (!(b > a)) return {};
    const double h = 0.5 * (b - a);
    auto g = [&](double u) -> cplx {
        const double x = a + h * (1.0 - std::cos(std::numbers::pi * u));
        const double dx = h * std::numbers::pi * std::sin(std::numbers::pi * u);
        if (dx == 0.0) return {0.0, 0.0};
        return cplx(f(x)) * dx;
    };
    return adaptive(g, 0.0, 1.0, rel_tol, depth, abs_tol);
}

// Absolute tolerance handed to level lv of an iterated integral whose total must meet abs_tol.
inline double level_abs_tol(double abs_tol, std::span<const Interval> boxes, std::size_t lv) {
    double t = abs_tol;
    for (std::size_t i = 0; i < lv; ++i) t *= 0.2 / std::max(boxes[i].length(), 1e-300);
    return t;
}

// Iterated adaptive integration over a box; f receives a pointer to the coordinates.
template <class F>
Estimate nested(F&& f, std::span<const Interval> boxes, double rel_tol, unsigned depth, double abs_tol = 0.0) {
    std::array<double, 8> x{};
    auto rec = [&](auto&& self, std::size_t lv) -> Estimate {
        if (lv == boxes.size()) {
            const cplx v = f(x.data());
            return {v, 0.0, std::abs(v)};
        }
        const double tol = std::max(rel_tol * std::pow(0.2, static_cast<double>(lv)), 1e-13);
        return adaptive(
            [&](double t) {
                x[lv] = t;
                return self(self, lv + 1).value;
            },
            boxes[lv].lo, boxes[lv].hi, tol, depth, level_abs_tol(abs_tol, boxes, lv));
    };
    return rec(rec, 0);
}

// Nodes and weights of a composite 16-point Gauss-Legendre rule on [a,b].
struct NodeSet {
    std::vector<double> x;
    std::vector<double> w;
};

inline NodeSet composite_gauss(double a, double b, int panels) {
    using Rule = boost::math::quadrature::gauss<double, 16>;
    const auto& abs = Rule::abscissa();
    const auto& wts = Rule::weights();
    NodeSet out;
    if (!(b > a) || panels <= 0) return out;
    out.x.reserve(16 * panels);
    out.w.reserve(16 * panels);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < abs.size(); ++i) {
            out.x.push_back(mid - 0.5 * h * abs[i]);
            out.w.push_back(0.5 * h * wts[i]);
            out.x.push_back(mid + 0.5 * h * abs[i]);
            out.w.push_back(0.5 * h * wts[i]);
        }
    }
    return out;
}

} // namespace quad
} // namespace qftscat
