#include "qftscat/lszlab.hpp"

#include "qftscat/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace qftscat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Barycentric interpolation on Chebyshev-Lobatto points of [lo, hi].
class ChebyshevTable {
public:
    ChebyshevTable(double lo, double hi, int nodes) : lo_(lo), hi_(hi) {
        if (nodes < 3) throw InvalidArgument("Chebyshev table needs at least 3 nodes");
        for (int i = 0; i < nodes; ++i)
            x_.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * std::cos(kPi * i / (nodes - 1)));
    }

    const std::vector<double>& nodes() const { return x_; }
    void set_values(std::vector<cplx> v) { y_ = std::move(v); }

    cplx operator()(double x) const {
        cplx num{0.0, 0.0};
        double den = 0.0;
        const int n = static_cast<int>(x_.size());
        for (int i = 0; i < n; ++i) {
            const double diff = x - x_[i];
            if (diff == 0.0) return y_[i];
            double w = (i % 2 == 0) ? 1.0 : -1.0;
            if (i == 0 || i == n - 1) w *= 0.5;
            num += (w / diff) * y_[i];
            den += w / diff;
        }
        return num / den;
    }

private:
    double lo_, hi_;
    std::vector<double> x_;
    std::vector<cplx> y_;
};

int fold_panels(double length, double t_max, int minimum) {
    return std::max(minimum, static_cast<int>(std::ceil(length * std::max(t_max, 1.0) / 4.0)));
}

std::vector<Interval> spatial_boxes_of(const WavePacket& p, int d, double widths) {
    std::vector<Interval> out;
    for (int c = 1; c < d; ++c) out.push_back(p.box(c, widths));
    return out;
}

} // namespace

cplx chi_t(LegLabel a, const FourVector& k, double t, const ModelParams& params, const CutoffSpec& cutoff) {
    if (a == LegLabel::Loc) return {1.0, 0.0};
    const double w = omega_of(k, params.m);
    const double phase = a == LegLabel::In ? -1.0 : 1.0;
    cplx v{0.0, 0.0};
    const double cp = chi_plus_minus(k, 1, params, cutoff);
    if (cp != 0.0) v += cp * std::exp(kI * (phase * (k.energy() - w) * t));
    const double cm = chi_plus_minus(k, -1, params, cutoff);
    if (cm != 0.0) v += cm * std::exp(kI * (phase * (k.energy() + w) * t));
    return v;
}

cplx chi_t(LegLabel a, const ShellPoint& k, double t, const ModelParams& params, const CutoffSpec& cutoff) {
    return chi_t(a, k.momentum(), t, params, cutoff);
}

std::vector<double> MultiTimeSchedule::times(double t) const {
    std::vector<double> out(order.size(), 0.0);
    double scale = 1.0;
    for (int leg : order) {
        out.at(static_cast<std::size_t>(leg)) = t * scale;
        scale *= ratio;
    }
    return out;
}

MultiTimeSchedule MultiTimeSchedule::identity(int n, double ratio) {
    MultiTimeSchedule s;
    s.order.resize(n);
    std::iota(s.order.begin(), s.order.end(), 0);
    s.ratio = ratio;
    return s;
}

MultiTimeSchedule MultiTimeSchedule::reversed(int n, double ratio) {
    MultiTimeSchedule s = identity(n, ratio);
    std::reverse(s.order.begin(), s.order.end());
    return s;
}

void FiniteTimeSetup::validate() const {
    const int n = static_cast<int>(f.size());
    if (n < 2) throw InvalidArgument("finite-time pairing needs at least two legs");
    if (static_cast<int>(labels.size()) != n) throw InvalidArgument("one label per leg required");
    ev.structure.validate();
    for (const auto& p : f.legs)
        if (p.dim() != ev.params().d) throw InvalidArgument("packet dimension differs from model d");
    if (ev.transfer) {
        const ValidationReport rep = validate_transfer_family(*ev.transfer);
        if (!rep.pass) {
            const auto& v = rep.violations.front();
            throw InvalidArgument("transfer family fails " + v.clause + ": " + v.message + " " + v.witness);
        }
    }
}

MomentumWeight FiniteTimeSetup::weight() const {
    const int n = static_cast<int>(f.size());
    if (!ev.transfer || n < 3) return {};
    return weight_of(ev.transfer->member(n));
}

double FiniteTimeSetup::reference_omega() const {
    double sum = 0.0;
    int count = 0;
    for (std::size_t l = 0; l < f.size(); ++l) {
        if (labels[l] == LegLabel::Loc) continue;
        sum += omega_of(f[l].center, ev.params().m);
        ++count;
    }
    return count == 0 ? ev.params().m : sum / count;
}

double FiniteTimeSetup::window_period() const { return 2.0 * kPi / (2.0 * reference_omega()); }

Estimate finite_time_pairing(const FiniteTimeSetup& setup, std::span<const double> times) {
    setup.validate();
    const int n = static_cast<int>(setup.f.size());
    if (static_cast<int>(times.size()) != n) throw InvalidArgument("one time per leg required");
    for (double t : times)
        if (!std::isfinite(t)) throw InvalidArgument("schedule times must be finite");
    const auto& sev = setup.ev.structure;
    std::vector<LegMultiplier> mult;
    for (int l = 0; l < n; ++l) mult.push_back(TimeMultiplier{setup.labels[l], times[l], sev.params, sev.cutoff});
    return pair_with_leg_multipliers(setup.f, mult, sev, setup.weight());
}

FiniteTimePairing::FiniteTimePairing(const FiniteTimeSetup& setup, double t_max, int chebyshev_nodes) {
    setup.validate();
    const int n = static_cast<int>(setup.f.size());
    if (n < 3) throw InvalidArgument("fast finite-time pairing needs n >= 3; use finite_time_pairing");
    if (chebyshev_nodes % 2 == 0) ++chebyshev_nodes;  // keep s = 0 on the grid
    period_ = setup.window_period();
    const auto& sev = setup.ev.structure;
    const auto& p = sev.params;
    const MomentumWeight weight = setup.weight();

    std::vector<ReducedIntegrand> terms;
    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
        terms.emplace_back(j, setup.f, sev, weight);
        scale = std::max(scale, pv_scale(terms.back(), sev));
    }
    for (int j = 0; j < n; ++j)
        if (setup.labels[j] == LegLabel::Loc) static_part_ += pv_term(terms[j], sev, {}, scale).value;

    const double S = p.m - std::sqrt(p.m * p.m - sev.cutoff.eps);
    const quad::NodeSet fold = quad::composite_gauss(0.0, S, fold_panels(S, t_max, sev.quad.fold_panels));
    for (int j = 0; j < n; ++j) {
        if (setup.labels[j] == LegLabel::Loc) continue;
        const ReducedIntegrand& g = terms[j];
        const WavePacket& fj = setup.f[j];
        const auto boxes = spatial_boxes_of(fj, p.d, sev.quad.box_widths);
        const double elen = std::max(fj.box(0, sev.quad.box_widths).length(), 1e-300);
        const double abs_tol = sev.quad.rel_tol * 1e-2 * scale / elen;
        const double g_abs = quad::level_abs_tol(abs_tol, boxes, boxes.size()) * 0.2;

        // Phi(s) = sum over both shells of int dk phi(s(s +- 2w)) g(+-w + s, k)/(s +- 2w).
        auto phi_at = [&](double s) -> cplx {
            auto integrand = [&](const double* x) -> cplx {
                FourVector k(p.d);
                for (int c = 1; c < p.d; ++c) k[c] = x[c - 1];
                const double w = omega_of(k, p.m);
                cplx v{0.0, 0.0};
                for (int sigma : {1, -1}) {
                    const double den = s + 2.0 * sigma * w;
                    const double c = sev.cutoff.phi(s * den);
                    if (c == 0.0) continue;
                    k[0] = sigma * w + s;
                    v += c * g.evaluate(k, g_abs).value / den;
                }
                return v;
            };
            return quad::nested(integrand, boxes, sev.quad.rel_tol, sev.quad.max_depth, abs_tol).value;
        };

        ChebyshevTable table(-S, S, chebyshev_nodes);
        std::vector<cplx> vals;
        for (double s : table.nodes()) vals.push_back(phi_at(s));
        table.set_values(vals);

        Leg leg;
        leg.j = j;
        leg.phase = setup.labels[j] == LegLabel::In ? -1 : 1;
        leg.phi0 = vals[static_cast<std::size_t>(chebyshev_nodes / 2)];
        leg.s = fold.x;
        leg.w = fold.w;
        for (double s : fold.x) {
            leg.plus.push_back(table(s));
            leg.minus.push_back(table(-s));
        }
        legs_.push_back(std::move(leg));
    }
}

cplx FiniteTimePairing::leg_value(const Leg& leg, double t, bool averaged) const {
    // PV int e^{i p s t} Phi(s)/s ds folded onto s > 0.
    cplx v{0.0, 0.0};
    for (std::size_t i = 0; i < leg.s.size(); ++i) {
        const double s = leg.s[i];
        const cplx e = std::exp(kI * (leg.phase * s * t));
        cplx term = (e * leg.plus[i] - std::conj(e) * leg.minus[i]) / s;
        if (averaged) term *= sinc(0.5 * s * period_);
        v += leg.w[i] * term;
    }
    return v;
}

cplx FiniteTimePairing::value(std::span<const double> times) const {
    cplx v = static_part_;
    for (const Leg& leg : legs_) v += leg_value(leg, times[static_cast<std::size_t>(leg.j)], false);
    return v;
}

cplx FiniteTimePairing::window_average(std::span<const double> times) const {
    cplx v = static_part_;
    for (const Leg& leg : legs_) v += leg_value(leg, times[static_cast<std::size_t>(leg.j)], true);
    return v;
}

cplx FiniteTimePairing::limit() const {
    cplx v = static_part_;
    for (const Leg& leg : legs_) v += static_cast<double>(leg.phase) * kI * kPi * leg.phi0;
    return v;
}

std::vector<double> default_t_grid(int points, double lo, double hi) {
    if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw InvalidArgument("t grid needs >= 2 points and 0 < lo < hi");
    std::vector<double> t;
    for (int i = 0; i < points; ++i) t.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
    return t;
}

ConvergenceReport analyse_convergence(std::vector<double> t_grid, std::vector<cplx> values,
                                      std::vector<cplx> window_averaged, std::optional<cplx> target) {
    const std::size_t n = t_grid.size();
    if (n < 2 || values.size() != n || window_averaged.size() != n)
        throw InvalidArgument("convergence analysis needs matching grids of at least two points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("t grid must be increasing");
    ConvergenceReport r;
    r.t_grid = std::move(t_grid);
    r.values = std::move(values);
    r.window_averaged = std::move(window_averaged);
    r.target = target;

    const std::size_t tail = std::min<std::size_t>(4, n);
    cplx L{0.0, 0.0};
    for (std::size_t i = n - tail; i < n; ++i) L += r.window_averaged[i];
    L /= static_cast<double>(tail);
    r.extrapolated_limit = L;
    const double t_last = r.t_grid.back();
    double movement = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (r.t_grid[i] < t_last / 10.0) continue;
        movement = std::max(movement, std::abs(r.window_averaged[i] - L));
        r.oscillation_amplitude = std::max(r.oscillation_amplitude, std::abs(r.values[i] - r.window_averaged[i]));
    }
    double size = std::abs(L);
    for (const cplx& v : r.window_averaged) size = std::max(size, std::abs(v));
    r.limit_uncertainty = std::max(movement, 1e-9 * std::abs(L));

    const cplx ref = target.value_or(L);
    for (const cplx& v : r.window_averaged) r.errors.push_back(std::abs(v - ref));
    const double denom = std::abs(ref) > 0.0 ? std::abs(ref) : std::max(size, 1e-300);
    r.final_relative_error = r.errors.back() / denom;

    // Errors below this are quadrature noise and do not count against the envelope.
    const double floor = 1e-6 * std::max(size, 1e-300);
    const double t0 = r.t_grid.front();
    std::vector<double> decade_max;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(std::floor(std::log10(r.t_grid[i] / t0) + 1e-9));
        if (decade_max.size() <= k) decade_max.resize(k + 1, -1.0);
        decade_max[k] = std::max(decade_max[k], r.errors[i]);
    }
    double prev = -1.0;
    for (double m : decade_max) {
        if (m < 0.0) continue;
        if (prev >= 0.0 && m > prev * (1.0 + 1e-6) + floor) r.envelope_ok = false;
        prev = m;
    }
    r.status = r.envelope_ok ? "CONVERGED" : "FAILED CONVERGENCE";

    // |error| ~ C t^{-alpha}, least squares in log-log over points above the noise floor.
    const std::size_t usable = target ? n : n - tail;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < usable; ++i) {
        if (!(r.errors[i] > floor)) continue;
        const double x = std::log(r.t_grid[i]);
        const double y = std::log(r.errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m >= 3 && m * sxx - sx * sx > 0.0) {
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        r.fit_alpha = -slope;
        r.fit_C = std::exp((sy - slope * sx) / m);
        r.fit_valid = true;
    }
    return r;
}

ConvergenceStudy convergence_study(const FiniteTimeSetup& setup, std::span<const double> t_grid,
                                   std::span<const MultiTimeSchedule> orderings, std::optional<cplx> target) {
    setup.validate();
    if (t_grid.size() < 2) throw InvalidArgument("convergence study needs a t grid");
    if (!(t_grid.back() >= 100.0 * t_grid.front()))
        throw InvalidArgument("convergence study t grid must cover at least two decades");
    if (orderings.empty()) throw InvalidArgument("convergence study needs at least one ordering");
    const int n = static_cast<int>(setup.f.size());
    for (const auto& o : orderings) {
        std::vector<int> sorted = o.order;
        std::sort(sorted.begin(), sorted.end());
        for (int l = 0; l < n; ++l)
            if (static_cast<int>(sorted.size()) != n || sorted[l] != l)
                throw InvalidArgument("ordering must be a permutation of the legs");
    }

    ConvergenceStudy study;
    study.orderings.assign(orderings.begin(), orderings.end());
    std::optional<FiniteTimePairing> fast;
    if (n >= 3) {
        fast.emplace(setup, t_grid.back());
        study.analytic_limit = fast->limit();
    }
    const double T = setup.window_period();
    for (const auto& o : orderings) {
        std::vector<cplx> values;
        std::vector<cplx> averaged;
        for (double t : t_grid) {
            const auto times = o.times(t);
            if (fast) {
                values.push_back(fast->value(times));
                averaged.push_back(fast->window_average(times));
                continue;
            }
            // Two legs: direct pairings, window average by Gauss-Legendre over the period.
            values.push_back(finite_time_pairing(setup, times).value);
            using Rule = boost::math::quadrature::gauss<double, 7>;
            cplx avg{0.0, 0.0};
            for (int side : {-1, 1}) {
                for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
                    const double x = Rule::abscissa()[i];
                    if (side < 0 && x == 0.0) continue;
                    std::vector<double> shifted = times;
                    for (double& s : shifted) s += side * 0.5 * T * x;
                    avg += 0.5 * Rule::weights()[i] * finite_time_pairing(setup, shifted).value;
                }
            }
            averaged.push_back(avg);
        }
        if (!fast && study.reports.empty()) study.analytic_limit = averaged.back();
        study.reports.push_back(analyse_convergence({t_grid.begin(), t_grid.end()}, values, averaged, target));
    }
    double u2 = 0.0;
    for (const auto& r : study.reports) {
        study.limit += r.extrapolated_limit;
        u2 += r.limit_uncertainty * r.limit_uncertainty;
    }
    study.limit /= static_cast<double>(study.reports.size());
    study.uncertainty = std::sqrt(u2);
    for (const auto& a : study.reports)
        for (const auto& b : study.reports)
            study.spread = std::max(study.spread, std::abs(a.extrapolated_limit - b.extrapolated_limit));
    study.ordering_independent = study.spread <= study.uncertainty + 1e-9 * std::abs(study.limit);
    return study;
}

ConvergenceReport pv_limit_demo(const std::function<cplx(double)>& f, double half_range, std::span<const double> t_grid,
                                int sign) {
    if (!(half_range > 0.0)) throw InvalidArgument("pv demo needs a positive half range");
    if (sign != 1 && sign != -1) throw InvalidArgument("pv demo sign must be +1 or -1");
    if (t_grid.empty()) throw InvalidArgument("pv demo needs a t grid");
    const quad::NodeSet fold = quad::composite_gauss(0.0, half_range, fold_panels(half_range, t_grid.back(), 32));
    std::vector<cplx> fp, fm;
    for (double s : fold.x) {
        fp.push_back(f(s));
        fm.push_back(f(-s));
    }
    const double T = kPi;  // one period of e^{2 i m t} with m = 1
    std::vector<cplx> values, averaged;
    for (double t : t_grid) {
        cplx v{0.0, 0.0};
        cplx a{0.0, 0.0};
        for (std::size_t i = 0; i < fold.x.size(); ++i) {
            const double s = fold.x[i];
            const cplx e = std::exp(kI * (sign * s * t));
            const cplx term = fold.w[i] * (e * fp[i] - std::conj(e) * fm[i]) / s;
            v += term;
            a += term * sinc(0.5 * s * T);
        }
        values.push_back(v);
        averaged.push_back(a);
    }
    return analyse_convergence({t_grid.begin(), t_grid.end()}, values, averaged,
                               static_cast<double>(sign) * kI * kPi * f(0.0));
}

SokhotskyCheck sokhotsky_check(const std::function<cplx(double)>& f, double half_range, double eps) {
    if (!(eps > 0.0) || !(half_range > eps)) throw InvalidArgument("Sokhotsky check needs 0 < eps < half range");
    SokhotskyCheck c;
    c.eps = eps;
    const Estimate pv = quad::adaptive([&](double s) { return (f(s) - f(-s)) / s; }, 0.0, half_range, 1e-13, 30);
    c.pv_minus_ipi = pv.value - kI * kPi * f(0.0);
    // int f/(xi + i e) folded: [f(s)(s - i e) - f(-s)(s + i e)] / (s^2 + e^2), split on a
    // geometric ladder of breakpoints around the width e.
    auto regulated = [&](double e) {
        std::vector<double> cuts{0.0};
        for (double x = e; x < half_range; x *= 4.0) cuts.push_back(x);
        cuts.push_back(half_range);
        cplx sum{0.0, 0.0};
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            sum += quad::adaptive(
                       [&](double s) {
                           return (f(s) * cplx(s, -e) - f(-s) * cplx(s, e)) / (s * s + e * e);
                       },
                       cuts[i], cuts[i + 1], 1e-13, 30)
                       .value;
        }
        return sum;
    };
    c.regulated = regulated(eps);
    c.extrapolated = 2.0 * regulated(0.5 * eps) - c.regulated;
    c.raw_deviation = std::abs(c.regulated - c.pv_minus_ipi);
    c.deviation = std::abs(c.extrapolated - c.pv_minus_ipi);
    return c;
}

ConvergenceReport riemann_lebesgue_decay(const SpectralDensity& rho, const PacketProduct& f,
                                         std::span<const double> t_grid, const StructureEvaluator& ev) {
    if (f.size() != 2) throw InvalidArgument("Riemann-Lebesgue study needs a two-leg packet product");
    if (t_grid.size() < 2) throw InvalidArgument("Riemann-Lebesgue study needs a t grid");
    const std::vector<double> grid(t_grid.begin(), t_grid.end());
    if (rho.is_zero()) {
        const std::vector<cplx> zero(grid.size(), cplx(0.0, 0.0));
        return analyse_convergence(grid, zero, zero, cplx(0.0, 0.0));
    }
    const auto& p = ev.params;
    const double widths = ev.quad.box_widths;
    std::vector<Interval> boxes;
    for (int c = 1; c < p.d; ++c) {
        const Interval b1 = f[0].box(c, widths);
        const Interval b2 = f[1].box(c, widths);
        boxes.push_back({std::max(b1.lo, -b2.hi), std::min(b1.hi, -b2.lo)});
    }
    const double e_hi = std::min({rho.support_low + 20.0 * p.m, -f[0].box(0, widths).lo, f[1].box(0, widths).hi});
    bool empty = !(e_hi > rho.support_low);
    for (const auto& b : boxes) empty = empty || b.empty();
    if (empty) {
        const std::vector<cplx> zero(grid.size(), cplx(0.0, 0.0));
        return analyse_convergence(grid, zero, zero, cplx(0.0, 0.0));
    }

    // With xi = w_m(k) - w_mu(k), d mu / (2 w_mu) = d xi / (2 mu), so the term is the Fourier
    // transform of Psi(xi) = int dk rho(mu) f1(-w_mu, k) f2(w_mu, -k) / (2 mu).
    const double xi_lo = p.m - e_hi;
    const double xi_hi = 0.0;
    auto psi = [&](double xi) -> cplx {
        auto integrand = [&](const double* x) -> cplx {
            FourVector k1(p.d);
            FourVector k2(p.d);
            for (int c = 1; c < p.d; ++c) {
                k1[c] = x[c - 1];
                k2[c] = -x[c - 1];
            }
            const double wmu = omega_of(k1, p.m) - xi;
            if (wmu > e_hi) return {0.0, 0.0};
            const double mu2 = wmu * wmu - k1.spatial_norm2();
            if (!(mu2 > rho.support_low * rho.support_low)) return {0.0, 0.0};
            const double mu = std::sqrt(mu2);
            const double r = rho(mu);
            if (r == 0.0) return {0.0, 0.0};
            k1[0] = -wmu;
            k2[0] = wmu;
            return r * f[0](k1) * f[1](k2) / (2.0 * mu);
        };
        return quad::nested(integrand, boxes, ev.quad.rel_tol, ev.quad.max_depth).value;
    };
    const quad::NodeSet nodes = quad::composite_gauss(xi_lo, xi_hi, fold_panels(xi_hi - xi_lo, grid.back(), 64));
    ChebyshevTable table(xi_lo, xi_hi, 257);
    std::vector<cplx> vals;
    for (double x : table.nodes()) vals.push_back(psi(x));
    table.set_values(vals);
    std::vector<cplx> at;
    for (double x : nodes.x) at.push_back(table(x));
    const double T = kPi;
    std::vector<cplx> values, averaged;
    for (double t : grid) {
        cplx v{0.0, 0.0};
        cplx a{0.0, 0.0};
        for (std::size_t i = 0; i < nodes.x.size(); ++i) {
            const cplx term = nodes.w[i] * std::exp(kI * (nodes.x[i] * t)) * at[i];
            v += term;
            a += term * sinc(0.5 * nodes.x[i] * T);
        }
        values.push_back(v);
        averaged.push_back(a);
    }
    return analyse_convergence(grid, values, averaged, cplx(0.0, 0.0));
}

FourierBound l1_fourier_bound(const WavePacket& f) {
    if (f.dim() != 1) throw InvalidArgument("l1_fourier_bound needs a one-dimensional packet");
    f.validate();
    const Interval box = f.box(0, 12.0);
    const WavePacket f2 = f.derivative(0).derivative(0);
    auto fx = [&](double x) { return f(FourVector{x}); };
    const double shift = f.shift ? std::abs((*f.shift)[0]) : 0.0;
    const double reach = (12.0 + 2.0 * f.poly.degree()) / f.width + shift;
    FourierBound b;
    b.lhs = quad::adaptive(
                [&](double t) { return std::abs(fourier_1d(fx, t, box, 1e-11).value); }, -reach, reach, 1e-9, 20)
                .value.real();
    const double integral =
        quad::adaptive([&](double x) { return std::abs(fx(x) - f2(FourVector{x})); }, box.lo, box.hi, 1e-11, 20)
            .value.real();
    b.rhs = kPi / std::sqrt(2.0 * kPi) * integral;
    b.pass = b.lhs <= b.rhs * (1.0 + 1e-6);
    return b;
}

} // namespace qftscat
