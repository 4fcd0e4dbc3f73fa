#pragma once

#include "qftscat/formfactor.hpp"
#include "qftscat/kinematics.hpp"
#include "qftscat/structure.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qftscat {

// coeff * f_1 (x) ... (x) f_n
struct BorchersTerm {
    cplx coeff{1.0, 0.0};
    PacketProduct packets;
};

// Finite sequence (f_0, f_1, ..., f_N) with every f_n a sum of tensor-product terms.
struct BorchersVector {
    cplx scalar{0.0, 0.0};
    std::map<int, std::vector<BorchersTerm>> components;

    static BorchersVector unit();
    static BorchersVector single(const WavePacket& f, cplx coeff = 1.0);
    static BorchersVector of(const PacketProduct& f, cplx coeff = 1.0);

    void add(const BorchersTerm& t);
    int max_order() const;
    // f_n at n momenta (0 if the order is absent).
    cplx evaluate(std::span<const FourVector> k) const;
    BorchersVector scaled(cplx c) const;
};

// Graded tensor-concatenation product; throws if an order above max_order would be produced.
BorchersVector borchers_product(const BorchersVector& f, const BorchersVector& g, int max_order = 4);
// Conjugated coefficients, reversed legs, each leg k -> conj f(-k).
BorchersVector borchers_involution(const BorchersVector& f);

// Truncated n-point pairing of a tensor-product packet (n >= 2).
using TruncatedPairing = std::function<cplx(const PacketProduct&)>;

// W(h) = h_0 + sum_n W_n(h_n), with W_n assembled from truncated pairings over set partitions:
// W_0 = 1, singleton blocks vanish, blocks larger than max_order vanish.
struct PairingFunctional {
    TruncatedPairing truncated;
    int max_order = 4;
    std::string tag;

    cplx full(const PacketProduct& p) const;
    cplx operator()(const BorchersVector& h) const;
};

PairingFunctional structure_functional(const StructureEvaluator& ev, const MomentumWeight& weight = {});
// Form-factor pairings with one label on every leg; the transfer family (if any) weights orders >= 3.
PairingFunctional formfactor_functional(const FormFactorEvaluator& ev, LegLabel label);

struct GramMatrix {
    Eigen::MatrixXcd H;
    double hermiticity_deviation = 0.0;  // ||H - H^dagger|| / ||H|| before symmetrization
    std::string tag;
};

GramMatrix gram_matrix(const PairingFunctional& w, std::span<const BorchersVector> family, unsigned threads = 1);

struct Inertia {
    int positive = 0;
    int negative = 0;
    int null = 0;
};

struct MetricDecomposition {
    Eigen::MatrixXcd eta;
    Eigen::MatrixXcd basis;  // unitary eigenvector matrix
    Eigen::VectorXd eigenvalues;
    Inertia inertia;
    double eta_square_deviation = 0.0;  // max |(eta^2 - I)_ij|
};

// eta = U sign(Lambda) U^dagger, with null directions (|lambda| <= 1e-10 ||H||) mapped to +1.
MetricDecomposition metric_decomposition(const Eigen::MatrixXcd& H);

// |f_0| + sum_terms |coeff| * ||packets||_{K,L}
double borchers_seminorm(const BorchersVector& f, int K, int L);

struct HsscEstimate {
    int K = 0;
    int L = 0;
    double constant = 0.0;
    int sample_size = 0;
};

HsscEstimate hssc_estimate(const PairingFunctional& w, std::span<const BorchersVector> family, int K, int L,
                           unsigned threads = 1);
HsscEstimate hssc_estimate(const GramMatrix& g, std::span<const BorchersVector> family, int K, int L);

struct PositivityResult {
    GramMatrix gram;
    double min_eigenvalue = 0.0;
    bool pass = false;
};

// Gram of a uniformly in- (or out-) labelled family; pass iff min eigenvalue >= -1e-8 ||H||.
PositivityResult inout_positivity_check(const FormFactorEvaluator& ev, LegLabel label,
                                        std::span<const BorchersVector> family, unsigned threads = 1);

} // namespace qftscat
