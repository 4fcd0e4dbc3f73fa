#pragma once

#include "qftscat/error.hpp"
#include "qftscat/quadrature.hpp"

#include <array>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace qftscat {

inline constexpr int kMaxDim = 4;

// Momentum (or position) vector with 1..4 components; index 0 is the energy.
class FourVector {
public:
    FourVector() = default;
    explicit FourVector(int dim);
    FourVector(std::initializer_list<double> comps);
    static FourVector from(std::span<const double> comps);

    int dim() const { return dim_; }
    double operator[](int i) const { return c_[i]; }
    double& operator[](int i) { return c_[i]; }
    double energy() const { return c_[0]; }
    double spatial_norm2() const;
    double euclidean_norm2() const;
    std::vector<double> components() const { return {c_.begin(), c_.begin() + dim_}; }

    FourVector& operator+=(const FourVector& o);
    FourVector& operator-=(const FourVector& o);
    FourVector& operator*=(double s);
    friend FourVector operator+(FourVector a, const FourVector& b) { return a += b; }
    friend FourVector operator-(FourVector a, const FourVector& b) { return a -= b; }
    friend FourVector operator*(double s, FourVector a) { return a *= s; }
    friend FourVector operator-(FourVector a) { return a *= -1.0; }
    friend bool operator==(const FourVector& a, const FourVector& b) = default;

private:
    std::array<double, kMaxDim> c_{};
    int dim_ = 0;
};

double minkowski_dot(const FourVector& x, const FourVector& y);
double omega(std::span<const double> spatial, double mass);
// omega of the spatial part of k.
double omega_of(const FourVector& k, double mass);

struct ModelParams {
    int d = 2;
    double m = 1.0;
    double m0 = 1.0;
    double eps_phi = 0.5;

    void validate() const;
};

// Point on the forward (sign=+1) or backward (sign=-1) mass shell.
struct ShellPoint {
    std::vector<double> spatial;
    double mass = 0.0;
    int sign = 1;

    double energy() const;
    FourVector momentum() const;
    static ShellPoint from_momentum(const FourVector& k, double mass);
};

// Smooth plateau bump: 1 on |x| <= eps/2, 0 on |x| >= eps.
struct CutoffSpec {
    double eps = 0.5;

    double phi(double x) const;
    static CutoffSpec from(const ModelParams& p) { return CutoffSpec{p.eps_phi}; }
};

double chi_plus_minus(const FourVector& k, int sign, const ModelParams& params, const CutoffSpec& cutoff);

// Linear map on momentum vectors, stored as a dense 4x4 block.
struct LorentzTransform {
    int dim = 0;
    std::array<std::array<double, kMaxDim>, kMaxDim> a{};

    FourVector apply(const FourVector& k) const;
    LorentzTransform compose(const LorentzTransform& inner) const;

    static LorentzTransform identity(int dim);
    static LorentzTransform boost(int dim, int axis, double rapidity);
    static LorentzTransform rotation(int dim, int axis1, int axis2, double angle);
    static LorentzTransform space_reflection(int dim);
    static LorentzTransform time_reflection(int dim);
};

// Complex polynomial in the momentum components of one leg.
class LegPolynomial {
public:
    struct Term {
        std::array<int, kMaxDim> exps{};
        cplx coeff{1.0, 0.0};
    };

    LegPolynomial() : terms_{Term{}} {}
    explicit LegPolynomial(std::vector<Term> terms);
    static LegPolynomial constant(cplx c);

    cplx operator()(const FourVector& k) const;
    const std::vector<Term>& terms() const { return terms_; }
    int degree() const;

    LegPolynomial derivative(int mu) const;
    // Multiplies by (k_mu - shift).
    LegPolynomial times_linear(int mu, double shift) const;
    LegPolynomial scaled(cplx c) const;
    LegPolynomial operator+(const LegPolynomial& o) const;
    LegPolynomial operator*(const LegPolynomial& o) const;
    // p(k) -> p(-k)
    LegPolynomial reflected() const;
    LegPolynomial conjugated() const;

private:
    void normalize();
    std::vector<Term> terms_;
};

// f(k) = amplitude * poly(k') * exp(-|k' - center|^2 / (2 width^2)) * exp(-i k.shift),
// with k' = frame(k) (identity when no frame is set). Euclidean norm in the Gaussian.
struct WavePacket {
    FourVector center;
    double width = 1.0;
    LegPolynomial poly;
    cplx amplitude{1.0, 0.0};
    std::optional<FourVector> shift;
    std::optional<LorentzTransform> frame;

    WavePacket() = default;
    WavePacket(FourVector c, double w) : center(c), width(w) {}

    int dim() const { return center.dim(); }
    cplx operator()(const FourVector& k) const;
    // k -> conj f(-k), the one-leg ingredient of the involution.
    WavePacket reflected_conjugate() const;
    // Analytic partial derivative (requires no frame).
    WavePacket derivative(int mu) const;
    // Interval in component mu outside which the packet is negligible.
    Interval box(int mu, double widths) const;
    // The same packet pulled back by a transform: g(k) = f(L^{-1} k).
    WavePacket transformed(const LorentzTransform& inverse) const;
    void validate() const;
};

// Tensor product of one-leg packets.
struct PacketProduct {
    std::vector<WavePacket> legs;

    std::size_t size() const { return legs.size(); }
    const WavePacket& operator[](std::size_t i) const { return legs[i]; }
    cplx operator()(std::span<const FourVector> k) const;
    PacketProduct involution() const;
};

// Pairwise Minkowski products q_ij, i <= j, ordered by j then i.
struct InvariantVector {
    int n = 0;
    std::vector<double> entries;

    static std::size_t index(int i, int j);  // 0-based, any order
    double at(int i, int j) const { return entries[index(i, j)]; }
    static std::size_t size_for(int n) { return static_cast<std::size_t>(n) * (n + 1) / 2; }
};

InvariantVector invariant_map(std::span<const FourVector> points);

struct SchwartzGrid {
    int points_per_dim = 0;  // 0 picks a dimension-dependent default
    bool refine = true;      // local polish of the grid maximum
};

// Weighted derivative supremum: max over |beta| <= K of sup (1+|k|^2)^{L/2} |D^beta f|.
double schwartz_norm(const WavePacket& f, int K, int L, const SchwartzGrid& grid = {});
// For a tensor product the supremum factorizes over legs.
double schwartz_norm(const PacketProduct& f, int K, int L, const SchwartzGrid& grid = {});

// (2 pi)^{-1/2} int_a^b exp(-i xi t) f(xi) d xi.
Estimate fourier_1d(const std::function<cplx(double)>& f, double t, Interval domain, double tol = 1e-10);

} // namespace qftscat
