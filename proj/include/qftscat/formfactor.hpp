#pragma once

#include "qftscat/kinematics.hpp"
#include "qftscat/structure.hpp"
#include "qftscat/transfer.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qftscat {

enum class LegLabel { In, Loc, Out };

std::string to_string(LegLabel a);
LegLabel parse_leg_label(const std::string& s);

struct PropagatorAtom {
    enum class Kind { OnShell, PrincipalValue };
    Kind kind = Kind::PrincipalValue;
    int sign = 0;  // shell sign for OnShell atoms
    cplx coefficient{1.0, 0.0};
};

// Decomposition of the leg propagator for a label into shell and principal-value atoms.
std::vector<PropagatorAtom> delta_hat_atoms(LegLabel a);

struct FormFactorEvaluator {
    StructureEvaluator structure;
    std::optional<TransferFamily> transfer;

    const ModelParams& params() const { return structure.params; }
    FormFactorEvaluator refined() const;
};

// Weight from a transfer polynomial, evaluated on momenta.
MomentumWeight weight_of(const TransferPolynomial& p);

// Integral of M * packets over the fully on-shell configurations with leg l on shell
// signs[l] and total momentum zero.
Estimate on_shell_pairing(std::span<const int> signs, const PacketProduct& f, const StructureEvaluator& ev,
                          const MomentumWeight& weight = {});

Estimate eval_FG_n(std::span<const LegLabel> labels, const PacketProduct& f, const FormFactorEvaluator& ev,
                   const MomentumWeight& weight = {});
Estimate eval_F_n(std::span<const LegLabel> labels, const PacketProduct& f, const FormFactorEvaluator& ev);

struct AmplitudeRequest {
    int r = 0;
    int n = 0;
    std::vector<WavePacket> in_packets;   // backward-shell centres (negative energy)
    std::vector<WavePacket> out_packets;  // forward-shell centres

    void validate(int d) const;
    PacketProduct packets() const;
};

// 2 pi i M_n(k) at an on-shell configuration in the scattering sign pattern.
cplx smatrix_density(const AmplitudeRequest& req, std::span<const ShellPoint> momenta, const FormFactorEvaluator& ev,
                     double tol = 1e-9);
// 2 pi i * integral of M_n times the packets over the constrained on-shell phase space.
Estimate smatrix_amplitude(const AmplitudeRequest& req, const FormFactorEvaluator& ev);

} // namespace qftscat
