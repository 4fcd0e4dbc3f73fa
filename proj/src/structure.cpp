#include "qftscat/structure.hpp"

#include "qftscat/phase_space.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace qftscat {

namespace {

constexpr int kMaxLegs = 8;

void check_estimate(const Estimate& e, double fail_tol, const char* what) {
    const double scale = std::max(e.l1, std::abs(e.value));
    if (e.error > fail_tol * scale && e.error > 1e-300) {
        std::ostringstream os;
        os << what << ": quadrature error estimate " << e.error << " exceeds tolerance (scale " << scale << ")";
        throw NumericalError(os.str());
    }
}

std::vector<Interval> spatial_boxes(const WavePacket& p, int d, double widths) {
    std::vector<Interval> out;
    for (int c = 1; c < d; ++c) out.push_back(p.box(c, widths));
    return out;
}

double bump_profile(double x, double lo, double hi) {
    if (x <= lo || x >= hi) return 0.0;
    const double u = (x - lo) / (hi - lo);
    return std::exp(-1.0 / (u * (1.0 - u)) + 4.0);
}

} // namespace

SpectralDensity SpectralDensity::none() { return SpectralDensity{}; }

SpectralDensity SpectralDensity::standard(double m, double c, double onset) {
    SpectralDensity r;
    r.name = "standard";
    r.support_low = onset * m;
    const double mc = r.support_low;
    r.density = [c, mc](double mu) {
        const double x = mu - mc;
        return x > 0.0 ? c * x * x * std::exp(-x) : 0.0;
    };
    r.poly_bound_degree = 2;
    return r;
}

SpectralDensity SpectralDensity::bump(double lo, double hi, double height) {
    if (!(hi > lo)) throw InvalidArgument("spectral bump needs lo < hi");
    SpectralDensity r;
    r.name = "bump";
    r.support_low = lo;
    r.density = [lo, hi, height](double mu) { return height * bump_profile(mu, lo, hi); };
    r.poly_bound_degree = 0;
    return r;
}

void StructureEvaluator::validate() const {
    params.validate();
    if (!(cutoff.eps > 0.0 && cutoff.eps < params.m * params.m))
        throw InvalidArgument("cutoff eps must satisfy 0 < eps < m^2");
    if (!rho.is_zero()) {
        if (!(rho.support_low > params.m)) throw InvalidArgument("spectral.support_low must exceed m");
        const double top = params.m * params.m + cutoff.eps;
        if (top > rho.support_low * rho.support_low) {
            throw InvalidArgument("cutoff window (m^2-eps, m^2+eps) reaches the continuum onset support_low^2");
        }
    }
    if (!(quad.rel_tol > 0.0) || quad.max_depth == 0 || !(quad.box_widths > 0.0) || quad.scan_points < 2 ||
        quad.fold_panels < 1 || !(quad.root_tol > 0.0) || !(quad.fail_tol > 0.0)) {
        throw InvalidArgument("quadrature settings must be positive");
    }
}

StructureEvaluator StructureEvaluator::refined() const {
    StructureEvaluator e = *this;
    e.quad = quad.refined();
    return e;
}

ReducedIntegrand::ReducedIntegrand(int j, PacketProduct f, const StructureEvaluator& ev, MomentumWeight weight,
                                   std::vector<LegMultiplier> multipliers)
    : j_(j), f_(std::move(f)), ev_(&ev), weight_(std::move(weight)), multipliers_(std::move(multipliers)) {
    const int n = static_cast<int>(f_.size());
    if (n < 3) throw InvalidArgument("reduced integrand needs n >= 3 legs");
    if (n > kMaxLegs) throw InvalidArgument("reduced integrand supports at most 8 legs");
    if (j < 0 || j >= n) throw InvalidArgument("reduced integrand leg index out of range");
    if (!multipliers_.empty() && static_cast<int>(multipliers_.size()) != n)
        throw InvalidArgument("one multiplier per leg required");
    for (int l = 0; l < n; ++l) {
        if (l == j) continue;
        others_.push_back(l);
        signs_.push_back(l < j ? -1 : 1);
    }
    const int d = ev.params.d;
    phase_space::ShellConstraint sc(d, ev.params.m, others_, signs_, ev.quad.root_tol);
    for (int i = 0; i < sc.free_dimension(); ++i) {
        const auto [leg, comp] = sc.coordinate(i);
        boxes_.push_back(f_[leg].box(comp, ev.quad.box_widths));
    }
}

Estimate ReducedIntegrand::evaluate(const FourVector& kj, double abs_tol) const {
    const cplx fj = f_[j_](kj);
    if (fj == cplx(0.0, 0.0)) return {};
    const int n = order();
    const auto& p = ev_->params;
    phase_space::ShellConstraint sc(p.d, p.m, others_, signs_, ev_->quad.root_tol);
    std::array<FourVector, kMaxLegs> mom{};
    mom[j_] = kj;
    auto integrand = [&](std::span<const FourVector> k) -> cplx {
        cplx v{1.0, 0.0};
        for (int l : others_) {
            v *= f_[l](k[l]);
            if (v == cplx(0.0, 0.0)) return v;
        }
        if (!multipliers_.empty())
            for (int l : others_) v *= multipliers_[l](k[l]);
        if (weight_) v *= weight_(k.first(n));
        return v;
    };
    Estimate e = phase_space::integrate(sc, -kj, boxes_, std::span<FourVector>(mom.data(), n), integrand, ev_->quad,
                                        ev_->quad.rel_tol * 0.04, abs_tol / std::abs(fj));
    return fj * e;
}

std::vector<double> ReducedIntegrand::energy_thresholds(const FourVector& kj) const {
    const int n = order();
    const double mass = (n - 1) * ev_->params.m;
    const double e = std::sqrt(kj.spatial_norm2() + mass * mass);
    if (j_ == 0) return {-e};       // all other legs forward: -k_j in the forward cone
    if (j_ == n - 1) return {e};    // all other legs backward
    return {};
}

Estimate pv_integral(const std::function<cplx(double)>& h, double pole, Interval range, double rel_tol,
                     unsigned depth) {
    Estimate out;
    if (range.empty()) return out;
    if (!(pole > range.lo && pole < range.hi)) {
        return quad::adaptive([&](double x) { return h(x) / (x - pole); }, range.lo, range.hi, rel_tol, depth);
    }
    const double delta = std::min(pole - range.lo, range.hi - pole);
    out += quad::adaptive([&](double s) { return (h(pole + s) - h(pole - s)) / s; }, 0.0, delta, rel_tol, depth);
    out += quad::adaptive([&](double x) { return h(x) / (x - pole); }, range.lo, pole - delta, rel_tol, depth);
    out += quad::adaptive([&](double x) { return h(x) / (x - pole); }, pole + delta, range.hi, rel_tol, depth);
    return out;
}

namespace {

// PV int over [a,b] of num(k0)/(k0^2 - w^2) with breakpoints at thresholds.
Estimate energy_pv(const std::function<cplx(double)>& num, double w, Interval range, std::vector<double> thresholds,
                   double rel_tol, unsigned depth, double abs_tol) {
    std::vector<double> poles;
    for (double p : {-w, w})
        if (p > range.lo && p < range.hi) poles.push_back(p);
    std::vector<double> pts{range.lo, range.hi};
    for (double t : thresholds)
        if (t > range.lo && t < range.hi) pts.push_back(t);
    std::sort(pts.begin(), pts.end());

    struct Hole {
        double lo, hi, pole;
    };
    std::vector<Hole> holes;
    for (double p : poles) {
        double delta = std::numeric_limits<double>::infinity();
        for (double x : pts) delta = std::min(delta, std::abs(x - p));
        if (poles.size() == 2) delta = std::min(delta, w);
        holes.push_back({p - delta, p + delta, p});
    }

    Estimate out;
    for (const Hole& hole : holes) {
        const double p = hole.pole;
        const double other = -p;
        const double delta = hole.hi - p;
        auto H = [&](double x) { return num(x) / (x - other); };
        out += quad::adaptive([&](double s) { return (H(p + s) - H(p - s)) / s; }, 0.0, delta, rel_tol, depth,
                              abs_tol);
    }
    // Regular pieces: [a,b] split at thresholds and hole edges, holes removed.
    std::vector<double> cuts = pts;
    for (const Hole& hole : holes) {
        cuts.push_back(hole.lo);
        cuts.push_back(hole.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    auto regular = [&](double x) { return num(x) / ((x - w) * (x + w)); };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (!(b > a)) continue;
        const double mid = 0.5 * (a + b);
        bool inside_hole = false;
        for (const Hole& hole : holes) inside_hole = inside_hole || (mid > hole.lo && mid < hole.hi);
        if (inside_hole) continue;
        out += quad::adaptive_endpoint(regular, a, b, rel_tol, depth, abs_tol);
    }
    return out;
}

} // namespace

namespace {

cplx multiplied(const ReducedIntegrand& g, const LegMultiplier& multiplier, const FourVector& k, double abs_tol) {
    cplx v = g.evaluate(k, abs_tol).value;
    if (multiplier && v != cplx(0.0, 0.0)) v *= multiplier(k);
    return v;
}

} // namespace

double pv_scale(const ReducedIntegrand& g, const StructureEvaluator& ev, const LegMultiplier& multiplier) {
    const auto& p = ev.params;
    const WavePacket& fj = g.packets()[g.leg()];
    const auto boxes = spatial_boxes(fj, p.d, ev.quad.box_widths);
    const Interval ebox = fj.box(0, ev.quad.box_widths);
    double volume = ebox.length();
    for (const Interval& b : boxes) volume *= b.length();
    constexpr int kSpatial = 5;
    constexpr int kEnergy = 12;
    double peak = 0.0;
    const int cells = static_cast<int>(std::pow(kSpatial, p.d - 1));
    for (int c = 0; c < cells; ++c) {
        FourVector k(p.d);
        int rest = c;
        for (int a = 1; a < p.d; ++a) {
            const Interval& b = boxes[a - 1];
            k[a] = b.lo + b.length() * (rest % kSpatial + 0.5) / kSpatial;
            rest /= kSpatial;
        }
        for (int e = 0; e < kEnergy; ++e) {
            k[0] = ebox.lo + ebox.length() * (e + 0.5) / kEnergy;
            // The bare integrand counts too: a multiplier may confine the support between grid points.
            const cplx bare = g.evaluate(k, 0.0).value;
            peak = std::max(peak, std::abs(bare));
            if (multiplier && bare != cplx(0.0, 0.0)) peak = std::max(peak, std::abs(bare * multiplier(k)));
        }
    }
    return volume * peak;
}

Estimate pv_term(const ReducedIntegrand& g, const StructureEvaluator& ev, const LegMultiplier& multiplier,
                 double scale) {
    const auto& p = ev.params;
    const WavePacket& fj = g.packets()[g.leg()];
    const auto boxes = spatial_boxes(fj, p.d, ev.quad.box_widths);
    const Interval ebox = fj.box(0, ev.quad.box_widths);
    if (scale < 0.0) scale = pv_scale(g, ev, multiplier);
    const double abs_tol = ev.quad.rel_tol * 1e-2 * scale;
    const double energy_abs = quad::level_abs_tol(abs_tol, boxes, boxes.size());
    // g's own error enters through 1/(k^2 - m^2); 0.05 leaves room for that factor.
    const double g_abs = 0.05 * energy_abs / std::max(ebox.length(), 1e-300);

    auto inner = [&](const double* x) -> cplx {
        FourVector k(p.d);
        for (int c = 1; c < p.d; ++c) k[c] = x[c - 1];
        const double w = omega_of(k, p.m);
        auto num = [&](double k0) -> cplx {
            k[0] = k0;
            return multiplied(g, multiplier, k, g_abs);
        };
        FourVector kt = k;
        return energy_pv(num, w, ebox, g.energy_thresholds(kt), ev.quad.rel_tol * 0.2, ev.quad.max_depth, energy_abs)
            .value;
    };
    return quad::nested(inner, boxes, ev.quad.rel_tol, ev.quad.max_depth, abs_tol);
}

Estimate eval_Ghat_n(const PacketProduct& f, const StructureEvaluator& ev, const MomentumWeight& weight) {
    const std::vector<LegMultiplier> none;
    return pair_with_leg_multipliers(f, none, ev, weight);
}

namespace {

Interval intersect(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

// Boxes for the spatial momentum k of leg 1 with leg 2 carrying -k.
std::vector<Interval> two_point_boxes(const PacketProduct& f, const StructureEvaluator& ev) {
    std::vector<Interval> boxes;
    for (int c = 1; c < ev.params.d; ++c) {
        const Interval b1 = f[0].box(c, ev.quad.box_widths);
        const Interval b2 = f[1].box(c, ev.quad.box_widths);
        boxes.push_back(intersect(b1, {-b2.hi, -b2.lo}));
    }
    return boxes;
}

cplx two_point_integrand(const PacketProduct& f, std::span<const LegMultiplier> mult, const FourVector& k1,
                         const FourVector& k2) {
    cplx v = f[0](k1) * f[1](k2);
    if (v != cplx(0.0, 0.0) && !mult.empty()) v *= mult[0](k1) * mult[1](k2);
    return v;
}

} // namespace

Estimate two_point_discrete(const PacketProduct& f, const StructureEvaluator& ev,
                            std::span<const LegMultiplier> multipliers) {
    if (f.size() != 2) throw InvalidArgument("two-point pairing needs exactly two legs");
    const auto boxes = two_point_boxes(f, ev);
    for (const auto& b : boxes)
        if (b.empty()) return {};
    const int d = ev.params.d;
    auto integrand = [&](const double* x) -> cplx {
        FourVector k1(d);
        FourVector k2(d);
        for (int c = 1; c < d; ++c) {
            k1[c] = x[c - 1];
            k2[c] = -x[c - 1];
        }
        const double w = omega_of(k1, ev.params.m);
        k1[0] = -w;
        k2[0] = w;
        return two_point_integrand(f, multipliers, k1, k2) / (2.0 * w);
    };
    return quad::nested(integrand, boxes, ev.quad.rel_tol, ev.quad.max_depth);
}

Estimate two_point_continuum(const PacketProduct& f, const StructureEvaluator& ev,
                             std::span<const LegMultiplier> multipliers) {
    if (f.size() != 2) throw InvalidArgument("two-point pairing needs exactly two legs");
    if (ev.rho.is_zero()) return {};
    const auto boxes = two_point_boxes(f, ev);
    for (const auto& b : boxes)
        if (b.empty()) return {};
    const double lo = ev.rho.support_low;
    const double hi = std::min({lo + 20.0 * ev.params.m, -f[0].box(0, ev.quad.box_widths).lo,
                                f[1].box(0, ev.quad.box_widths).hi});
    if (!(hi > lo)) return {};
    const int d = ev.params.d;
    auto per_mu = [&](double mu) -> cplx {
        const double r = ev.rho(mu);
        if (r == 0.0) return {0.0, 0.0};
        auto integrand = [&](const double* x) -> cplx {
            FourVector k1(d);
            FourVector k2(d);
            for (int c = 1; c < d; ++c) {
                k1[c] = x[c - 1];
                k2[c] = -x[c - 1];
            }
            const double w = omega_of(k1, mu);
            k1[0] = -w;
            k2[0] = w;
            return two_point_integrand(f, multipliers, k1, k2) / (2.0 * w);
        };
        return r * quad::nested(integrand, boxes, ev.quad.rel_tol * 0.2, ev.quad.max_depth).value;
    };
    return quad::adaptive(per_mu, lo, hi, ev.quad.rel_tol, ev.quad.max_depth);
}

Estimate eval_Ghat_2(const PacketProduct& f, const StructureEvaluator& ev) {
    Estimate e = two_point_discrete(f, ev) + two_point_continuum(f, ev);
    check_estimate(e, ev.quad.fail_tol, "two-point pairing");
    return e;
}

Estimate pair_with_leg_multipliers(const PacketProduct& f, std::span<const LegMultiplier> multipliers,
                                   const StructureEvaluator& ev, const MomentumWeight& weight) {
    const int n = static_cast<int>(f.size());
    if (!multipliers.empty() && static_cast<int>(multipliers.size()) != n)
        throw InvalidArgument("one multiplier per leg required");
    if (n == 2) {
        Estimate e = two_point_discrete(f, ev, multipliers) + two_point_continuum(f, ev, multipliers);
        check_estimate(e, ev.quad.fail_tol, "two-point pairing");
        return e;
    }
    if (n < 2) throw InvalidArgument("structure pairing needs at least two legs");
    std::vector<LegMultiplier> mult(multipliers.begin(), multipliers.end());
    Estimate total;
    std::vector<ReducedIntegrand> terms;
    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
        terms.emplace_back(j, f, ev, weight, mult);
        scale = std::max(scale, pv_scale(terms.back(), ev, mult.empty() ? LegMultiplier{} : mult[j]));
    }
    for (int j = 0; j < n; ++j) total += pv_term(terms[j], ev, mult.empty() ? LegMultiplier{} : mult[j], scale);
    check_estimate(total, ev.quad.fail_tol, "structure pairing");
    return total;
}

std::vector<RefinementRow> refinement_study(const std::function<Estimate(const StructureEvaluator&)>& run,
                                            const StructureEvaluator& ev, int levels) {
    std::vector<RefinementRow> rows;
    StructureEvaluator cur = ev;
    for (int l = 0; l < levels; ++l) {
        const Estimate e = run(cur);
        rows.push_back({l, e.value, e.error});
        cur = cur.refined();
    }
    return rows;
}

} // namespace qftscat
