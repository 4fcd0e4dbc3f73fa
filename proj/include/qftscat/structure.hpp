#pragma once

#include "qftscat/kinematics.hpp"
#include "qftscat/quadrature.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qftscat {

// Continuum weight of the two-point function; zero below support_low.
struct SpectralDensity {
    std::string name = "none";
    double support_low = 0.0;
    std::function<double(double)> density;
    int poly_bound_degree = 0;

    bool is_zero() const { return !density; }
    double operator()(double mu) const { return (!density || mu < support_low) ? 0.0 : density(mu); }

    static SpectralDensity none();
    // c (mu - mc)^2 exp(-(mu - mc)) for mu > mc, with mc = onset * m.
    static SpectralDensity standard(double m, double c = 0.1, double onset = 1.5);
    // Smooth bump of the given height on (lo, hi).
    static SpectralDensity bump(double lo, double hi, double height);
};

using LegMultiplier = std::function<cplx(const FourVector&)>;
using MomentumWeight = std::function<cplx(std::span<const FourVector>)>;

struct StructureEvaluator {
    ModelParams params;
    CutoffSpec cutoff;
    SpectralDensity rho;
    QuadratureSettings quad;

    StructureEvaluator() = default;
    StructureEvaluator(ModelParams p, SpectralDensity r, QuadratureSettings q = {})
        : params(p), cutoff(CutoffSpec::from(p)), rho(std::move(r)), quad(q) {}

    // Settings positive, cutoff window (m^2 - eps, m^2 + eps) below the continuum onset.
    void validate() const;
    StructureEvaluator refined() const;
};

// g_j(k_j): the packet product integrated over the other legs, l<j on the backward
// shell and l>j on the forward shell, with total momentum conservation. j is 0-based.
class ReducedIntegrand {
public:
    ReducedIntegrand(int j, PacketProduct f, const StructureEvaluator& ev, MomentumWeight weight = {},
                     std::vector<LegMultiplier> multipliers = {});

    int leg() const { return j_; }
    int order() const { return static_cast<int>(f_.size()); }
    // abs_tol bounds the error of the returned value (0: relative tolerance only).
    Estimate evaluate(const FourVector& kj, double abs_tol = 0.0) const;
    cplx operator()(const FourVector& kj) const { return evaluate(kj).value; }
    // Energies k_j^0 (at fixed spatial k_j) across which the support of g_j starts or ends
    // with a threshold singularity; only same-sign configurations are tracked.
    std::vector<double> energy_thresholds(const FourVector& kj) const;
    const PacketProduct& packets() const { return f_; }
    const StructureEvaluator& evaluator() const { return *ev_; }

private:
    int j_;
    PacketProduct f_;
    const StructureEvaluator* ev_;
    MomentumWeight weight_;
    std::vector<LegMultiplier> multipliers_;
    std::vector<int> others_;
    std::vector<int> signs_;
    std::vector<Interval> boxes_;
};

// sum_j PV int g_j(k)/(k^2 - m^2) dk (n >= 3), optionally weighted by M(k_1..k_n).
Estimate eval_Ghat_n(const PacketProduct& f, const StructureEvaluator& ev, const MomentumWeight& weight = {});
// Discrete shell plus continuum pairing of a two-leg packet product.
Estimate eval_Ghat_2(const PacketProduct& f, const StructureEvaluator& ev);
// Same pairings with leg j's packet replaced by multiplier_j * packet_j.
Estimate pair_with_leg_multipliers(const PacketProduct& f, std::span<const LegMultiplier> multipliers,
                                   const StructureEvaluator& ev, const MomentumWeight& weight = {});

// Coarse-grid size (box volume times peak of |g| and |A g|) of one principal-value term.
double pv_scale(const ReducedIntegrand& g, const StructureEvaluator& ev, const LegMultiplier& multiplier = {});
// PV int A(k) g(k)/(k^2-m^2) dk for one reduced integrand. Errors below rel_tol * 1e-2 * scale
// are accepted; a negative scale means pv_scale of this term.
Estimate pv_term(const ReducedIntegrand& g, const StructureEvaluator& ev, const LegMultiplier& multiplier = {},
                 double scale = -1.0);

// The discrete (mass m) part of the two-point pairing and the continuum part separately.
Estimate two_point_discrete(const PacketProduct& f, const StructureEvaluator& ev,
                            std::span<const LegMultiplier> multipliers = {});
Estimate two_point_continuum(const PacketProduct& f, const StructureEvaluator& ev,
                             std::span<const LegMultiplier> multipliers = {});

// PV int_a^b h(x)/(x - p) dx for p in (a,b) by the symmetric fold on the largest
// pole-centred subinterval plus direct quadrature of the remainder.
Estimate pv_integral(const std::function<cplx(double)>& h, double pole, Interval range, double rel_tol,
                     unsigned depth = 16);

struct RefinementRow {
    int level = 0;
    cplx value;
    double error = 0.0;
};

// Re-evaluates a pairing with successively refined quadrature settings.
std::vector<RefinementRow> refinement_study(const std::function<Estimate(const StructureEvaluator&)>& run,
                                            const StructureEvaluator& ev, int levels);

} // namespace qftscat
