#include "qftscat/formfactor.hpp"

#include "qftscat/phase_space.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace qftscat {

namespace {

constexpr cplx kTwoPiI{0.0, 2.0 * std::numbers::pi};
constexpr cplx kIPi{0.0, std::numbers::pi};
constexpr int kMaxLegs = 8;

} // namespace

std::string to_string(LegLabel a) {
    switch (a) {
    case LegLabel::In: return "in";
    case LegLabel::Loc: return "loc";
    case LegLabel::Out: return "out";
    }
    return "?";
}

LegLabel parse_leg_label(const std::string& s) {
    if (s == "in") return LegLabel::In;
    if (s == "loc") return LegLabel::Loc;
    if (s == "out") return LegLabel::Out;
    throw InvalidArgument("unknown leg label '" + s + "' (expected in, loc or out)");
}

std::vector<PropagatorAtom> delta_hat_atoms(LegLabel a) {
    using K = PropagatorAtom::Kind;
    switch (a) {
    case LegLabel::In: return {{K::OnShell, 1, -kIPi}, {K::OnShell, -1, kIPi}};
    case LegLabel::Loc: return {{K::PrincipalValue, 0, 1.0}};
    case LegLabel::Out: return {{K::OnShell, 1, kIPi}, {K::OnShell, -1, -kIPi}};
    }
    return {};
}

FormFactorEvaluator FormFactorEvaluator::refined() const {
    FormFactorEvaluator e = *this;
    e.structure = structure.refined();
    return e;
}

MomentumWeight weight_of(const TransferPolynomial& p) {
    return [p](std::span<const FourVector> k) { return p(k); };
}

Estimate on_shell_pairing(std::span<const int> signs, const PacketProduct& f, const StructureEvaluator& ev,
                          const MomentumWeight& weight) {
    const int n = static_cast<int>(f.size());
    if (n < 3 || n > kMaxLegs) throw InvalidArgument("on-shell pairing supports 3..8 legs");
    if (static_cast<int>(signs.size()) != n) throw InvalidArgument("one shell sign per leg required");
    std::vector<int> legs(n);
    for (int l = 0; l < n; ++l) legs[l] = l;
    const auto& p = ev.params;
    phase_space::ShellConstraint sc(p.d, p.m, legs, std::vector<int>(signs.begin(), signs.end()), ev.quad.root_tol);
    std::vector<Interval> boxes;
    for (int i = 0; i < sc.free_dimension(); ++i) {
        const auto [leg, comp] = sc.coordinate(i);
        boxes.push_back(f[leg].box(comp, ev.quad.box_widths));
    }
    std::array<FourVector, kMaxLegs> mom{};
    auto integrand = [&](std::span<const FourVector> k) -> cplx {
        cplx v = f(k.first(n));
        if (weight && v != cplx(0.0, 0.0)) v *= weight(k.first(n));
        return v;
    };
    Estimate e = phase_space::integrate(sc, FourVector(p.d), boxes, std::span<FourVector>(mom.data(), n), integrand,
                                        ev.quad, ev.quad.rel_tol);
    const double scale = std::max(e.l1, std::abs(e.value));
    if (e.error > ev.quad.fail_tol * scale && e.error > 1e-300) {
        std::ostringstream os;
        os << "on-shell pairing: quadrature error estimate " << e.error << " exceeds tolerance";
        throw NumericalError(os.str());
    }
    return e;
}

Estimate eval_FG_n(std::span<const LegLabel> labels, const PacketProduct& f, const FormFactorEvaluator& ev,
                   const MomentumWeight& weight) {
    const int n = static_cast<int>(f.size());
    if (static_cast<int>(labels.size()) != n) throw InvalidArgument("one label per leg required");
    if (n < 2) throw InvalidArgument("form factor needs at least two legs");
    const StructureEvaluator& sev = ev.structure;
    if (n == 2) {
        if (labels[0] == LegLabel::Loc && labels[1] == LegLabel::Loc) return eval_Ghat_2(f, sev);
        return two_point_discrete(f, sev);
    }
    Estimate total;
    std::map<std::vector<int>, cplx> patterns;
    std::vector<std::pair<ReducedIntegrand, cplx>> pv_legs;
    for (int j = 0; j < n; ++j) {
        for (const PropagatorAtom& atom : delta_hat_atoms(labels[j])) {
            if (atom.kind == PropagatorAtom::Kind::PrincipalValue) {
                pv_legs.emplace_back(ReducedIntegrand(j, f, sev, weight), atom.coefficient);
                continue;
            }
            std::vector<int> signs(n);
            for (int l = 0; l < n; ++l) signs[l] = l < j ? -1 : 1;
            signs[j] = atom.sign;
            patterns[signs] += atom.coefficient;
        }
    }
    double scale = 0.0;
    for (const auto& [g, c] : pv_legs) scale = std::max(scale, pv_scale(g, sev));
    for (const auto& [g, c] : pv_legs) total += c * pv_term(g, sev, {}, scale);
    for (const auto& [signs, coeff] : patterns) {
        if (std::abs(coeff) < 1e-14) continue;  // e.g. cancelling in/out atoms on the same pattern
        total += coeff * on_shell_pairing(signs, f, sev, weight);
    }
    return total;
}

Estimate eval_F_n(std::span<const LegLabel> labels, const PacketProduct& f, const FormFactorEvaluator& ev) {
    if (!ev.transfer) throw InvalidArgument("eval_F_n requires a transfer family");
    const ValidationReport rep = validate_transfer_family(*ev.transfer);
    if (!rep.pass) {
        const auto& v = rep.violations.front();
        throw InvalidArgument("transfer family fails " + v.clause + ": " + v.message + " " + v.witness);
    }
    const int n = static_cast<int>(f.size());
    if (n == 2) return eval_FG_n(labels, f, ev);
    return eval_FG_n(labels, f, ev, weight_of(ev.transfer->member(n)));
}

void AmplitudeRequest::validate(int d) const {
    if (n < 3) throw InvalidArgument("amplitude needs n >= 3");
    if (r < 1 || r > n - 1) throw InvalidArgument("amplitude needs 1 <= r <= n-1");
    if (static_cast<int>(in_packets.size()) != r || static_cast<int>(out_packets.size()) != n - r)
        throw InvalidArgument("amplitude needs r incoming and n-r outgoing packets");
    for (const auto& p : in_packets) {
        p.validate();
        if (p.dim() != d) throw InvalidArgument("incoming packet dimension differs from model d");
        if (!(p.center.energy() < 0.0))
            throw InvalidArgument("incoming packets must be centred on negative energy (backward shell)");
    }
    for (const auto& p : out_packets) {
        p.validate();
        if (p.dim() != d) throw InvalidArgument("outgoing packet dimension differs from model d");
        if (!(p.center.energy() > 0.0))
            throw InvalidArgument("outgoing packets must be centred on positive energy (forward shell)");
    }
}

PacketProduct AmplitudeRequest::packets() const {
    PacketProduct f;
    f.legs = in_packets;
    f.legs.insert(f.legs.end(), out_packets.begin(), out_packets.end());
    return f;
}

cplx smatrix_density(const AmplitudeRequest& req, std::span<const ShellPoint> momenta, const FormFactorEvaluator& ev,
                     double tol) {
    const int n = req.n;
    if (static_cast<int>(momenta.size()) != n) throw InvalidArgument("smatrix_density: need n shell points");
    std::vector<FourVector> k;
    FourVector sum(ev.params().d);
    double scale = 0.0;
    for (int l = 0; l < n; ++l) {
        const int expected = l < req.r ? -1 : 1;
        if (momenta[l].sign != expected) {
            throw InvalidArgument("smatrix_density: sign-pattern violation at leg " + std::to_string(l + 1));
        }
        k.push_back(momenta[l].momentum());
        sum += k.back();
        scale += std::abs(k.back().energy());
    }
    if (std::sqrt(sum.euclidean_norm2()) > tol * std::max(scale, 1.0))
        throw InvalidArgument("smatrix_density: momentum conservation violated");
    const cplx M = ev.transfer ? ev.transfer->member(n)(k) : cplx(1.0, 0.0);
    return kTwoPiI * M;
}

Estimate smatrix_amplitude(const AmplitudeRequest& req, const FormFactorEvaluator& ev) {
    req.validate(ev.params().d);
    std::vector<int> signs(req.n);
    for (int l = 0; l < req.n; ++l) signs[l] = l < req.r ? -1 : 1;
    MomentumWeight w;
    if (ev.transfer) w = weight_of(ev.transfer->member(req.n));
    return kTwoPiI * on_shell_pairing(signs, req.packets(), ev.structure, w);
}

} // namespace qftscat
