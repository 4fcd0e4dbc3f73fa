#pragma once

#include "qftscat/formfactor.hpp"
#include "qftscat/kinematics.hpp"
#include "qftscat/quadrature.hpp"
#include "qftscat/structure.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qftscat {

// Finite-time leg multiplier: in -> chi+ e^{-i(k0-w)t} + chi- e^{-i(k0+w)t}, loc -> 1,
// out -> the same with e^{+i...}. Equal to 1 on either mass shell.
cplx chi_t(LegLabel a, const FourVector& k, double t, const ModelParams& params, const CutoffSpec& cutoff);
cplx chi_t(LegLabel a, const ShellPoint& k, double t, const ModelParams& params, const CutoffSpec& cutoff);

struct TimeMultiplier {
    LegLabel label = LegLabel::Loc;
    double t = 0.0;
    ModelParams params;
    CutoffSpec cutoff;

    cplx operator()(const FourVector& k) const { return chi_t(label, k, t, params, cutoff); }
};

// Per-leg times. order lists legs from the one sent to infinity first; leg order[r]
// gets t * ratio^r.
struct MultiTimeSchedule {
    std::vector<int> order;
    double ratio = 0.5;

    std::vector<double> times(double t) const;
    static MultiTimeSchedule identity(int n, double ratio = 0.5);
    static MultiTimeSchedule reversed(int n, double ratio = 0.5);
};

struct FiniteTimeSetup {
    PacketProduct f;
    std::vector<LegLabel> labels;
    FormFactorEvaluator ev;  // the transfer family, when set, weights the pairing with M_n

    void validate() const;
    MomentumWeight weight() const;
    // Mean omega over the in/out leg centres (m if there are none).
    double reference_omega() const;
    // One period of the dominant oscillation, 2 pi / (2 omega_ref).
    double window_period() const;
};

// Pairing of the structure functional with prod_l chi_{t_l}(a_l) f_l, through
// pair_with_leg_multipliers.
Estimate finite_time_pairing(const FiniteTimeSetup& setup, std::span<const double> times);

// Same pairing for n >= 3, evaluated fast for many times. Only leg j's own multiplier
// matters in the j-th term (the others sit on their shells), and that term reduces to
// PV int e^{-+ i s t} Phi_j(s)/s ds over the shell offset s; Phi_j is tabulated once on
// Chebyshev nodes.
class FiniteTimePairing {
public:
    FiniteTimePairing(const FiniteTimeSetup& setup, double t_max, int chebyshev_nodes = 97);

    cplx value(std::span<const double> times) const;
    // Average over [t - T/2, t + T/2] in every leg time, T = window_period().
    cplx window_average(std::span<const double> times) const;
    // t -> infinity: -+ i pi Phi_j(0) per in/out leg plus the static local terms.
    cplx limit() const;
    double period() const { return period_; }

private:
    struct Leg {
        int j = 0;
        int phase = 0;            // -1 for in, +1 for out
        cplx phi0{0.0, 0.0};
        std::vector<double> s;    // fold nodes on (0, S]
        std::vector<double> w;
        std::vector<cplx> plus;   // Phi(s) at the nodes
        std::vector<cplx> minus;  // Phi(-s)
    };
    cplx leg_value(const Leg& leg, double t, bool averaged) const;

    std::vector<Leg> legs_;
    cplx static_part_{0.0, 0.0};
    double period_ = 0.0;
};

struct ConvergenceReport {
    std::vector<double> t_grid;
    std::vector<cplx> values;
    std::vector<cplx> window_averaged;
    std::vector<double> errors;  // |window average - reference|
    double oscillation_amplitude = 0.0;
    cplx extrapolated_limit{0.0, 0.0};
    double limit_uncertainty = 0.0;
    double fit_C = 0.0;
    double fit_alpha = 0.0;
    bool fit_valid = false;
    std::optional<cplx> target;
    double final_relative_error = 0.0;  // against target, else against the extrapolated limit
    bool envelope_ok = true;
    std::string status;  // "CONVERGED" or "FAILED CONVERGENCE"
};

// Extrapolation, rate fit and envelope check shared by every study.
ConvergenceReport analyse_convergence(std::vector<double> t_grid, std::vector<cplx> values,
                                      std::vector<cplx> window_averaged, std::optional<cplx> target);

// 32 log-spaced points on [1, 1000] by default.
std::vector<double> default_t_grid(int points = 32, double lo = 1.0, double hi = 1e3);

struct ConvergenceStudy {
    std::vector<MultiTimeSchedule> orderings;
    std::vector<ConvergenceReport> reports;
    cplx limit{0.0, 0.0};     // mean of the per-ordering limits
    double spread = 0.0;      // max distance between per-ordering limits
    double uncertainty = 0.0; // combined per-ordering uncertainty
    cplx analytic_limit{0.0, 0.0};
    bool ordering_independent = true;
};

ConvergenceStudy convergence_study(const FiniteTimeSetup& setup, std::span<const double> t_grid,
                                   std::span<const MultiTimeSchedule> orderings,
                                   std::optional<cplx> target = std::nullopt);

// PV int e^{sign i xi t} f(xi)/xi d xi over [-R, R] along the grid; target sign * i pi f(0).
ConvergenceReport pv_limit_demo(const std::function<cplx(double)>& f, double half_range, std::span<const double> t_grid,
                                int sign = 1);

struct SokhotskyCheck {
    double eps = 0.0;
    cplx pv_minus_ipi{0.0, 0.0};   // PV int f/xi - i pi f(0)
    cplx regulated{0.0, 0.0};      // int f/(xi + i eps)
    cplx extrapolated{0.0, 0.0};   // Richardson eps -> 0 from eps and eps/2
    double raw_deviation = 0.0;
    double deviation = 0.0;
};
SokhotskyCheck sokhotsky_check(const std::function<cplx(double)>& f, double half_range, double eps = 1e-5);

// Continuum part of the two-point finite-time pairing, int d mu rho(mu) int dk f1 f2
// e^{i(w_m - w_mu)t}/(2 w_mu), along the grid.
ConvergenceReport riemann_lebesgue_decay(const SpectralDensity& rho, const PacketProduct& f,
                                         std::span<const double> t_grid, const StructureEvaluator& ev);

struct FourierBound {
    double lhs = 0.0;  // || F f ||_{L1}
    double rhs = 0.0;  // pi (2 pi)^{-1/2} int |(1 - d^2/dxi^2) f|
    bool pass = false;
};
// For a one-dimensional packet.
FourierBound l1_fourier_bound(const WavePacket& f);

} // namespace qftscat
