#include "qftscat/kinematics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace qftscat {

namespace {

void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim) {
        throw InvalidArgument("vector dimension must be in 1..4, got " + std::to_string(dim));
    }
}

void require_same_dim(const FourVector& x, const FourVector& y) {
    if (x.dim() != y.dim()) {
        throw InvalidArgument("dimension mismatch: " + std::to_string(x.dim()) + " vs " +
                              std::to_string(y.dim()));
    }
}

double smooth_edge(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

} // namespace

FourVector::FourVector(int dim) : dim_(dim) { check_dim(dim); }

FourVector::FourVector(std::initializer_list<double> comps) : dim_(static_cast<int>(comps.size())) {
    check_dim(dim_);
    std::copy(comps.begin(), comps.end(), c_.begin());
}

FourVector FourVector::from(std::span<const double> comps) {
    FourVector v(static_cast<int>(comps.size()));
    std::copy(comps.begin(), comps.end(), v.c_.begin());
    return v;
}

double FourVector::spatial_norm2() const {
    double s = 0.0;
    for (int i = 1; i < dim_; ++i) s += c_[i] * c_[i];
    return s;
}

double FourVector::euclidean_norm2() const { return c_[0] * c_[0] + spatial_norm2(); }

FourVector& FourVector::operator+=(const FourVector& o) {
    require_same_dim(*this, o);
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
}

FourVector& FourVector::operator-=(const FourVector& o) {
    require_same_dim(*this, o);
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
}

FourVector& FourVector::operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
}

double minkowski_dot(const FourVector& x, const FourVector& y) {
    require_same_dim(x, y);
    double s = x[0] * y[0];
    for (int i = 1; i < x.dim(); ++i) s -= x[i] * y[i];
    return s;
}

double omega(std::span<const double> spatial, double mass) {
    if (mass < 0.0) throw InvalidArgument("omega: negative mass");
    // Same summation order as omega_of, so shell energies agree bit for bit.
    double s = 0.0;
    for (double x : spatial) s += x * x;
    return std::sqrt(s + mass * mass);
}

double omega_of(const FourVector& k, double mass) { return std::sqrt(k.spatial_norm2() + mass * mass); }

void ModelParams::validate() const {
    if (d < 2 || d > kMaxDim) throw InvalidArgument("model.d must be in 2..4");
    if (!(m > 0.0)) throw InvalidArgument("model.m must be positive");
    if (!(m0 > 0.0 && m0 <= m)) throw InvalidArgument("model.m0 must satisfy 0 < m0 <= m");
    if (!(eps_phi > 0.0 && eps_phi < m * m)) throw InvalidArgument("model.eps_phi must satisfy 0 < eps_phi < m^2");
}

double ShellPoint::energy() const { return sign * omega(spatial, mass); }

FourVector ShellPoint::momentum() const {
    FourVector k(static_cast<int>(spatial.size()) + 1);
    k[0] = energy();
    for (std::size_t i = 0; i < spatial.size(); ++i) k[static_cast<int>(i) + 1] = spatial[i];
    return k;
}

ShellPoint ShellPoint::from_momentum(const FourVector& k, double mass) {
    ShellPoint p;
    const auto comps = k.components();
    p.spatial.assign(comps.begin() + 1, comps.end());
    p.mass = mass;
    p.sign = k.energy() < 0.0 ? -1 : 1;
    return p;
}

double CutoffSpec::phi(double x) const {
    const double ax = std::abs(x);
    const double half = 0.5 * eps;
    if (ax <= half) return 1.0;
    if (ax >= eps) return 0.0;
    const double s = (ax - half) / half;
    const double up = smooth_edge(1.0 - s);
    return up / (smooth_edge(s) + up);
}

double chi_plus_minus(const FourVector& k, int sign, const ModelParams& params, const CutoffSpec& cutoff) {
    if (sign * k.energy() <= 0.0) return 0.0;
    return cutoff.phi(minkowski_dot(k, k) - params.m * params.m);
}

FourVector LorentzTransform::apply(const FourVector& k) const {
    if (k.dim() != dim) throw InvalidArgument("transform dimension mismatch");
    FourVector out(dim);
    for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim; ++j) s += a[i][j] * k[j];
        out[i] = s;
    }
    return out;
}

LorentzTransform LorentzTransform::compose(const LorentzTransform& inner) const {
    LorentzTransform out;
    out.dim = dim;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double s = 0.0;
            for (int l = 0; l < dim; ++l) s += a[i][l] * inner.a[l][j];
            out.a[i][j] = s;
        }
    return out;
}

LorentzTransform LorentzTransform::identity(int dim) {
    check_dim(dim);
    LorentzTransform t;
    t.dim = dim;
    for (int i = 0; i < dim; ++i) t.a[i][i] = 1.0;
    return t;
}

LorentzTransform LorentzTransform::boost(int dim, int axis, double rapidity) {
    LorentzTransform t = identity(dim);
    if (axis < 1 || axis >= dim) throw InvalidArgument("boost axis out of range");
    t.a[0][0] = std::cosh(rapidity);
    t.a[0][axis] = std::sinh(rapidity);
    t.a[axis][0] = std::sinh(rapidity);
    t.a[axis][axis] = std::cosh(rapidity);
    return t;
}

LorentzTransform LorentzTransform::rotation(int dim, int axis1, int axis2, double angle) {
    LorentzTransform t = identity(dim);
    if (axis1 < 1 || axis2 < 1 || axis1 >= dim || axis2 >= dim || axis1 == axis2) {
        throw InvalidArgument("rotation axes out of range");
    }
    t.a[axis1][axis1] = std::cos(angle);
    t.a[axis1][axis2] = -std::sin(angle);
    t.a[axis2][axis1] = std::sin(angle);
    t.a[axis2][axis2] = std::cos(angle);
    return t;
}

LorentzTransform LorentzTransform::space_reflection(int dim) {
    LorentzTransform t = identity(dim);
    for (int i = 1; i < dim; ++i) t.a[i][i] = -1.0;
    return t;
}

LorentzTransform LorentzTransform::time_reflection(int dim) {
    LorentzTransform t = identity(dim);
    t.a[0][0] = -1.0;
    return t;
}

LegPolynomial::LegPolynomial(std::vector<Term> terms) : terms_(std::move(terms)) { normalize(); }

LegPolynomial LegPolynomial::constant(cplx c) { return LegPolynomial({Term{{}, c}}); }

void LegPolynomial::normalize() {
    std::map<std::array<int, kMaxDim>, cplx> acc;
    for (const auto& t : terms_) acc[t.exps] += t.coeff;
    terms_.clear();
    for (const auto& [e, c] : acc) {
        if (c != cplx(0.0, 0.0)) terms_.push_back(Term{e, c});
    }
}

cplx LegPolynomial::operator()(const FourVector& k) const {
    cplx s{0.0, 0.0};
    for (const auto& t : terms_) {
        double prod = 1.0;
        for (int mu = 0; mu < k.dim(); ++mu) {
            for (int p = 0; p < t.exps[mu]; ++p) prod *= k[mu];
        }
        s += t.coeff * prod;
    }
    return s;
}

int LegPolynomial::degree() const {
    int d = 0;
    for (const auto& t : terms_) {
        int s = 0;
        for (int e : t.exps) s += e;
        d = std::max(d, s);
    }
    return d;
}

LegPolynomial LegPolynomial::derivative(int mu) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
        if (t.exps[mu] == 0) continue;
        Term n = t;
        n.coeff *= static_cast<double>(t.exps[mu]);
        n.exps[mu] -= 1;
        out.push_back(n);
    }
    return LegPolynomial(std::move(out));
}

LegPolynomial LegPolynomial::times_linear(int mu, double shift) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
        Term up = t;
        up.exps[mu] += 1;
        out.push_back(up);
        if (shift != 0.0) out.push_back(Term{t.exps, -shift * t.coeff});
    }
    return LegPolynomial(std::move(out));
}

LegPolynomial LegPolynomial::scaled(cplx c) const {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff *= c;
    return LegPolynomial(std::move(out));
}

LegPolynomial LegPolynomial::operator+(const LegPolynomial& o) const {
    std::vector<Term> out = terms_;
    out.insert(out.end(), o.terms_.begin(), o.terms_.end());
    return LegPolynomial(std::move(out));
}

LegPolynomial LegPolynomial::operator*(const LegPolynomial& o) const {
    std::vector<Term> out;
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) {
            Term t;
            for (int mu = 0; mu < kMaxDim; ++mu) t.exps[mu] = a.exps[mu] + b.exps[mu];
            t.coeff = a.coeff * b.coeff;
            out.push_back(t);
        }
    return LegPolynomial(std::move(out));
}

LegPolynomial LegPolynomial::reflected() const {
    std::vector<Term> out = terms_;
    for (auto& t : out) {
        int deg = 0;
        for (int e : t.exps) deg += e;
        if (deg % 2 == 1) t.coeff = -t.coeff;
    }
    return LegPolynomial(std::move(out));
}

LegPolynomial LegPolynomial::conjugated() const {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff = std::conj(t.coeff);
    return LegPolynomial(std::move(out));
}

cplx WavePacket::operator()(const FourVector& k) const {
    const FourVector kk = frame ? frame->apply(k) : k;
    double r2 = 0.0;
    for (int mu = 0; mu < kk.dim(); ++mu) {
        const double x = kk[mu] - center[mu];
        r2 += x * x;
    }
    cplx v = amplitude * poly(kk) * std::exp(-r2 / (2.0 * width * width));
    if (shift) {
        const double phase = minkowski_dot(k, *shift);
        v *= cplx(std::cos(phase), -std::sin(phase));
    }
    return v;
}

WavePacket WavePacket::reflected_conjugate() const {
    // conj f(-k): Gaussian centred at -center, polynomial reflected and conjugated,
    // exp(-i k.a) -> conj exp(+i k.a) = exp(-i k.a), so the shift is unchanged.
    WavePacket out = *this;
    out.center = -center;
    out.poly = poly.reflected().conjugated();
    out.amplitude = std::conj(amplitude);
    return out;
}

WavePacket WavePacket::derivative(int mu) const {
    if (frame) throw InvalidArgument("analytic derivative requires a packet without frame transform");
    WavePacket out = *this;
    LegPolynomial p = poly.derivative(mu) + poly.times_linear(mu, center[mu]).scaled(-1.0 / (width * width));
    if (shift) {
        // d/dk^mu exp(-i k.a) = -i eta_{mu mu} a^mu exp(-i k.a)
        const double eta = mu == 0 ? 1.0 : -1.0;
        p = p + poly.scaled(cplx(0.0, -eta * (*shift)[mu]));
    }
    out.poly = p;
    return out;
}

Interval WavePacket::box(int mu, double widths) const {
    if (!frame) return {center[mu] - widths * width, center[mu] + widths * width};
    // Points of the packet satisfy frame(k) near center, i.e. k = frame^{-1}(c').
    const int n = frame->dim;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = frame->a[i][j];
    const Eigen::MatrixXd b = a.inverse();
    double mid = 0.0;
    double half = 0.0;
    for (int j = 0; j < n; ++j) {
        mid += b(mu, j) * center[j];
        half += std::abs(b(mu, j)) * widths * width;
    }
    return {mid - half, mid + half};
}

WavePacket WavePacket::transformed(const LorentzTransform& inverse) const {
    WavePacket out = *this;
    out.frame = frame ? frame->compose(inverse) : inverse;
    return out;
}

void WavePacket::validate() const {
    if (center.dim() < 1) throw InvalidArgument("packet center has no components");
    if (!(width > 0.0)) throw InvalidArgument("packet width must be positive");
    if (shift && shift->dim() != center.dim()) throw InvalidArgument("packet shift dimension mismatch");
}

cplx PacketProduct::operator()(std::span<const FourVector> k) const {
    if (k.size() != legs.size()) throw InvalidArgument("packet product arity mismatch");
    cplx v{1.0, 0.0};
    for (std::size_t i = 0; i < legs.size(); ++i) {
        v *= legs[i](k[i]);
        if (v == cplx(0.0, 0.0)) break;
    }
    return v;
}

PacketProduct PacketProduct::involution() const {
    PacketProduct out;
    out.legs.reserve(legs.size());
    for (auto it = legs.rbegin(); it != legs.rend(); ++it) out.legs.push_back(it->reflected_conjugate());
    return out;
}

std::size_t InvariantVector::index(int i, int j) {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(j) * (j + 1) / 2 + i;
}

InvariantVector invariant_map(std::span<const FourVector> points) {
    InvariantVector q;
    q.n = static_cast<int>(points.size());
    q.entries.resize(InvariantVector::size_for(q.n));
    for (int j = 0; j < q.n; ++j)
        for (int i = 0; i <= j; ++i) q.entries[InvariantVector::index(i, j)] = minkowski_dot(points[i], points[j]);
    return q;
}

namespace {

std::vector<std::array<int, kMaxDim>> multi_indices(int dim, int K) {
    std::vector<std::array<int, kMaxDim>> out;
    std::array<int, kMaxDim> cur{};
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == dim) {
            out.push_back(cur);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            cur[pos] = e;
            self(self, pos + 1, left - e);
        }
        cur[pos] = 0;
    };
    rec(rec, 0, K);
    return out;
}

int default_points(int dim) {
    switch (dim) {
    case 1: return 4001;
    case 2: return 401;
    case 3: return 61;
    default: return 25;
    }
}

} // namespace

double schwartz_norm(const WavePacket& f, int K, int L, const SchwartzGrid& grid) {
    if (K < 0 || L < 0) throw InvalidArgument("schwartz_norm: K and L must be nonnegative");
    if (f.frame) throw InvalidArgument("schwartz_norm: packets with a frame transform are not supported");
    const int dim = f.dim();
    const int npts = grid.points_per_dim > 0 ? grid.points_per_dim : default_points(dim);
    const double radius = 12.0 + std::sqrt(static_cast<double>(L));

    std::array<Interval, kMaxDim> box{};
    for (int mu = 0; mu < dim; ++mu) box[mu] = f.box(mu, radius);

    double best = 0.0;
    for (const auto& beta : multi_indices(dim, K)) {
        WavePacket g = f;
        for (int mu = 0; mu < dim; ++mu)
            for (int p = 0; p < beta[mu]; ++p) g = g.derivative(mu);

        auto weighted = [&](const FourVector& k) {
            return std::pow(1.0 + k.euclidean_norm2(), 0.5 * L) * std::abs(g(k));
        };

        double interior = 0.0;
        double boundary = 0.0;
        FourVector arg(dim);
        FourVector argmax(dim);
        std::array<int, kMaxDim> idx{};
        long total = 1;
        for (int mu = 0; mu < dim; ++mu) total *= npts;
        for (long flat = 0; flat < total; ++flat) {
            long r = flat;
            bool on_edge = false;
            for (int mu = 0; mu < dim; ++mu) {
                idx[mu] = static_cast<int>(r % npts);
                r /= npts;
                arg[mu] = box[mu].lo + box[mu].length() * idx[mu] / (npts - 1);
                on_edge = on_edge || idx[mu] == 0 || idx[mu] == npts - 1;
            }
            const double v = weighted(arg);
            if (on_edge) boundary = std::max(boundary, v);
            if (v > interior) {
                interior = v;
                argmax = arg;
            }
        }
        if (interior > 0.0 && boundary > 1e-3 * interior) {
            throw NumericalError("schwartz_norm: grid too coarse, boundary value " + std::to_string(boundary) +
                                 " exceeds 1e-3 of interior maximum " + std::to_string(interior));
        }
        if (grid.refine && interior > 0.0) {
            // Compass search around the grid maximum.
            std::array<double, kMaxDim> step{};
            for (int mu = 0; mu < dim; ++mu) step[mu] = box[mu].length() / (npts - 1);
            for (int it = 0; it < 60; ++it) {
                bool moved = false;
                for (int mu = 0; mu < dim; ++mu) {
                    for (double dir : {-1.0, 1.0}) {
                        FourVector trial = argmax;
                        trial[mu] += dir * step[mu];
                        const double v = weighted(trial);
                        if (v > interior) {
                            interior = v;
                            argmax = trial;
                            moved = true;
                        }
                    }
                }
                if (!moved)
                    for (int mu = 0; mu < dim; ++mu) step[mu] *= 0.5;
            }
        }
        best = std::max(best, interior);
    }
    return best;
}

double schwartz_norm(const PacketProduct& f, int K, int L, const SchwartzGrid& grid) {
    double prod = 1.0;
    for (const auto& leg : f.legs) prod *= schwartz_norm(leg, K, L, grid);
    return prod;
}

Estimate fourier_1d(const std::function<cplx(double)>& f, double t, Interval domain, double tol) {
    auto integrand = [&](double xi) { return f(xi) * cplx(std::cos(xi * t), -std::sin(xi * t)); };
    Estimate e = quad::adaptive(integrand, domain.lo, domain.hi, tol, 20);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    e = cplx(norm) * e;
    if (e.error > 10.0 * tol * std::max(e.l1, 1e-300)) {
        std::ostringstream os;
        os << "fourier_1d: error estimate " << e.error << " above tolerance at t=" << t;
        throw NumericalError(os.str());
    }
    return e;
}

} // namespace qftscat
