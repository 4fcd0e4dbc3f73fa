#pragma once

#include "qftscat/kinematics.hpp"
#include "qftscat/transfer.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qftscat {

struct FitConfig {
    double E_max = 10.0;
    double epsilon = 1e-3;
    int max_degree = 8;
    int train_count = 400;
    int validate_count = 400;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;
};

// On-shell, momentum-conserving n-tuples with legs 0..r-1 on the backward shell, the rest
// forward, and forward energy sum <= E_max.
struct PhaseSpaceSample {
    int n = 0;
    int r = 0;
    double E_max = 0.0;
    double mass = 1.0;
    std::vector<std::vector<ShellPoint>> points;
    std::int64_t attempts = 0;
    bool kinematically_empty = false;
    std::string diagnostics;

    std::vector<FourVector> momenta(std::size_t i) const;
};

// Exact emptiness rule: nonempty iff 2 <= r <= n-2 and E_max >= max(r, n-r) m.
bool qn_nonempty(int n, int r, double E_max, double mass);

// Rejection sampling: free spatial coordinates uniform in [-E_max, E_max], the last two legs
// solved on their shells, a random root kept. Deterministic in cfg.seed and independent of
// cfg.threads. Draws cfg.train_count + cfg.validate_count points.
PhaseSpaceSample sample_Qn(int n, int r, const FitConfig& cfg, const ModelParams& params);

// Largest violation of the defining constraints (shell, signs, energy cap, conservation);
// recomputes energies from the spatial parts and never uses the sampler's solver.
double qn_constraint_residual(std::span<const ShellPoint> point, int r, double E_max, double mass);

using ReferenceFunction = std::function<double(std::span<const FourVector>)>;

// Invariant vectors and reference values, split into disjoint training and validation parts.
struct FitData {
    int n = 0;
    std::vector<InvariantVector> train;
    std::vector<double> train_values;
    std::vector<InvariantVector> validate;
    std::vector<double> validate_values;
    double q_scale = 1.0;  // invariants are divided by this inside the least-squares solve
};

// The first cfg.train_count sample points train, the remainder validate.
FitData make_fit_data(const ReferenceFunction& R, const PhaseSpaceSample& sample, const FitConfig& cfg);

// CSV with a header of invariant names (q12, q13, ...) and a final "value" column; diagonal
// invariants are set to m^2. Rows are shuffled with cfg.seed and split in the ratio
// train_count : validate_count.
FitData load_table(const std::string& path, int n, const FitConfig& cfg, double mass);

struct FitReport {
    TransferPolynomial polynomial;
    double achieved_sup_error = 0.0;  // on the validation part
    double train_sup_error = 0.0;
    int degree_used = 0;
    int train_count = 0;
    int validate_count = 0;
    int basis_size = 0;
    int rank = 0;
    std::vector<std::pair<int, double>> history;  // (degree, validation sup error)
    bool pass = false;
    std::string message;
};

// Symmetric polynomials in the off-diagonal invariants (S_n orbit sums of monomials), degree
// escalating from 0 until the validation sup error is below epsilon or max_degree is reached.
FitReport fit_polynomial(const FitData& data, const FitConfig& cfg);
FitReport fit_polynomial(const ReferenceFunction& R, const PhaseSpaceSample& sample, const FitConfig& cfg);

// M_2 = 1, fitted members, everything else 1. Throws if a fit failed or exceeds L_max.
TransferFamily build_family(const std::map<int, FitReport>& fits, int L_max);

struct ReferenceParams {
    double value = 1.0;   // constant
    double scale = 25.0;  // q_scale of exp_sym / exp_q12, in units of m^2
};

// Registry names: constant, planted_quadratic, exp_sym, exp_q12.
std::vector<std::string> reference_names();
ReferenceFunction make_reference(const std::string& name, int n, const ReferenceParams& p, double mass);
// The known symmetric degree-2 polynomial behind planted_quadratic.
TransferPolynomial planted_polynomial(int n, double mass);

} // namespace qftscat
