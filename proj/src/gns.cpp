#include "qftscat/gns.hpp"

#include "qftscat/error.hpp"
#include "qftscat/parallel.hpp"
#include "qftscat/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace qftscat {

BorchersVector BorchersVector::unit() {
    BorchersVector v;
    v.scalar = 1.0;
    return v;
}

BorchersVector BorchersVector::single(const WavePacket& f, cplx coeff) {
    PacketProduct p;
    p.legs.push_back(f);
    return of(p, coeff);
}

BorchersVector BorchersVector::of(const PacketProduct& f, cplx coeff) {
    BorchersVector v;
    if (f.size() == 0) {
        v.scalar = coeff;
        return v;
    }
    v.add({coeff, f});
    return v;
}

void BorchersVector::add(const BorchersTerm& t) {
    const int n = static_cast<int>(t.packets.size());
    if (n == 0) {
        scalar += t.coeff;
        return;
    }
    components[n].push_back(t);
}

int BorchersVector::max_order() const {
    int m = 0;
    for (const auto& [n, terms] : components)
        if (!terms.empty()) m = std::max(m, n);
    return m;
}

cplx BorchersVector::evaluate(std::span<const FourVector> k) const {
    if (k.empty()) return scalar;
    auto it = components.find(static_cast<int>(k.size()));
    if (it == components.end()) return {0.0, 0.0};
    cplx s{0.0, 0.0};
    for (const auto& t : it->second) s += t.coeff * t.packets(k);
    return s;
}

BorchersVector BorchersVector::scaled(cplx c) const {
    BorchersVector v = *this;
    v.scalar *= c;
    for (auto& [n, terms] : v.components)
        for (auto& t : terms) t.coeff *= c;
    return v;
}

BorchersVector borchers_product(const BorchersVector& f, const BorchersVector& g, int max_order) {
    BorchersVector out;
    out.scalar = f.scalar * g.scalar;
    auto check = [&](int n) {
        if (n > max_order) {
            throw InvalidArgument("Borchers product has order " + std::to_string(n) + " above the maximum " +
                                  std::to_string(max_order));
        }
    };
    if (f.scalar != cplx(0.0, 0.0)) {
        for (const auto& [n, terms] : g.components) {
            if (!terms.empty()) check(n);
            for (const auto& t : terms) out.add({f.scalar * t.coeff, t.packets});
        }
    }
    if (g.scalar != cplx(0.0, 0.0)) {
        for (const auto& [n, terms] : f.components) {
            if (!terms.empty()) check(n);
            for (const auto& t : terms) out.add({t.coeff * g.scalar, t.packets});
        }
    }
    for (const auto& [a, fa] : f.components) {
        for (const auto& [b, gb] : g.components) {
            if (fa.empty() || gb.empty()) continue;
            check(a + b);
            for (const auto& s : fa) {
                for (const auto& t : gb) {
                    BorchersTerm term{s.coeff * t.coeff, s.packets};
                    term.packets.legs.insert(term.packets.legs.end(), t.packets.legs.begin(), t.packets.legs.end());
                    out.add(term);
                }
            }
        }
    }
    return out;
}

BorchersVector borchers_involution(const BorchersVector& f) {
    BorchersVector out;
    out.scalar = std::conj(f.scalar);
    for (const auto& [n, terms] : f.components)
        for (const auto& t : terms) out.add({std::conj(t.coeff), t.packets.involution()});
    return out;
}

cplx PairingFunctional::full(const PacketProduct& p) const {
    const int n = static_cast<int>(p.size());
    if (n == 0) return {1.0, 0.0};
    if (n > 12) throw InvalidArgument("pairing functional supports at most 12 legs");
    std::unordered_map<std::uint32_t, cplx> memo;
    auto block = [&](std::span<const int> b) -> cplx {
        const int size = static_cast<int>(b.size());
        if (size < 2 || size > max_order) return {0.0, 0.0};
        std::uint32_t mask = 0;
        for (int i : b) mask |= 1u << i;
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        PacketProduct sub;
        for (int i : b) sub.legs.push_back(p[static_cast<std::size_t>(i)]);
        const cplx v = truncated(sub);
        memo.emplace(mask, v);
        return v;
    };
    return sum_over_partitions(n, block);
}

cplx PairingFunctional::operator()(const BorchersVector& h) const {
    cplx s = h.scalar;
    for (const auto& [n, terms] : h.components)
        for (const auto& t : terms)
            if (t.coeff != cplx(0.0, 0.0)) s += t.coeff * full(t.packets);
    return s;
}

PairingFunctional structure_functional(const StructureEvaluator& ev, const MomentumWeight& weight) {
    PairingFunctional w;
    w.tag = "structure";
    w.truncated = [ev, weight](const PacketProduct& p) -> cplx {
        if (p.size() == 2) return eval_Ghat_2(p, ev).value;
        return eval_Ghat_n(p, ev, weight).value;
    };
    return w;
}

PairingFunctional formfactor_functional(const FormFactorEvaluator& ev, LegLabel label) {
    PairingFunctional w;
    w.tag = "formfactor:" + to_string(label);
    w.truncated = [ev, label](const PacketProduct& p) -> cplx {
        const std::vector<LegLabel> labels(p.size(), label);
        if (ev.transfer) return eval_F_n(labels, p, ev).value;
        return eval_FG_n(labels, p, ev).value;
    };
    return w;
}

GramMatrix gram_matrix(const PairingFunctional& w, std::span<const BorchersVector> family, unsigned threads) {
    const auto n = static_cast<Eigen::Index>(family.size());
    if (n == 0) throw InvalidArgument("Gram matrix needs a nonempty family");
    std::vector<BorchersVector> stars;
    for (const auto& f : family) stars.push_back(borchers_involution(f));
    Eigen::MatrixXcd H(n, n);
    std::vector<cplx> slots(static_cast<std::size_t>(n * n));
    parallel_for(slots.size(), threads, [&](std::size_t idx) {
        const std::size_t i = idx / static_cast<std::size_t>(n);
        const std::size_t j = idx % static_cast<std::size_t>(n);
        slots[idx] = w(borchers_product(stars[i], family[j], 12));
    });
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) H(i, j) = slots[static_cast<std::size_t>(i * n + j)];
    GramMatrix g;
    g.tag = w.tag;
    const double norm = H.norm();
    g.hermiticity_deviation = norm > 0.0 ? (H - H.adjoint()).norm() / norm : 0.0;
    g.H = 0.5 * (H + H.adjoint());
    return g;
}

MetricDecomposition metric_decomposition(const Eigen::MatrixXcd& H) {
    if (H.rows() != H.cols()) throw InvalidArgument("metric decomposition needs a square matrix");
    const auto n = H.rows();
    MetricDecomposition m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    m.eigenvalues = es.eigenvalues();
    m.basis = es.eigenvectors();
    const double norm = n == 0 ? 0.0 : m.eigenvalues.cwiseAbs().maxCoeff();
    const double threshold = 1e-10 * norm;
    Eigen::VectorXd sign(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = m.eigenvalues(i);
        if (norm == 0.0 || std::abs(l) <= threshold) {
            ++m.inertia.null;
            sign(i) = 1.0;
        } else if (l > 0.0) {
            ++m.inertia.positive;
            sign(i) = 1.0;
        } else {
            ++m.inertia.negative;
            sign(i) = -1.0;
        }
    }
    m.eta = m.basis * sign.cast<cplx>().asDiagonal() * m.basis.adjoint();
    m.eta = 0.5 * (m.eta + m.eta.adjoint());
    const Eigen::MatrixXcd sq = m.eta * m.eta - Eigen::MatrixXcd::Identity(n, n);
    m.eta_square_deviation = n == 0 ? 0.0 : sq.cwiseAbs().maxCoeff();
    return m;
}

double borchers_seminorm(const BorchersVector& f, int K, int L) {
    double s = std::abs(f.scalar);
    for (const auto& [n, terms] : f.components)
        for (const auto& t : terms) s += std::abs(t.coeff) * schwartz_norm(t.packets, K, L);
    return s;
}

HsscEstimate hssc_estimate(const GramMatrix& g, std::span<const BorchersVector> family, int K, int L) {
    const auto n = static_cast<Eigen::Index>(family.size());
    if (g.H.rows() != n) throw InvalidArgument("Gram matrix and family sizes differ");
    std::vector<double> norms;
    for (const auto& f : family) {
        const double v = borchers_seminorm(f, K, L);
        if (!(v > 0.0)) throw InvalidArgument("family member has zero seminorm");
        norms.push_back(v);
    }
    HsscEstimate e;
    e.K = K;
    e.L = L;
    e.sample_size = static_cast<int>(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            e.constant = std::max(e.constant, std::abs(g.H(i, j)) / (norms[static_cast<std::size_t>(i)] *
                                                                     norms[static_cast<std::size_t>(j)]));
    return e;
}

HsscEstimate hssc_estimate(const PairingFunctional& w, std::span<const BorchersVector> family, int K, int L,
                           unsigned threads) {
    return hssc_estimate(gram_matrix(w, family, threads), family, K, L);
}

PositivityResult inout_positivity_check(const FormFactorEvaluator& ev, LegLabel label,
                                        std::span<const BorchersVector> family, unsigned threads) {
    if (label == LegLabel::Loc) throw InvalidArgument("positivity check needs uniform in or out labels");
    PositivityResult r;
    r.gram = gram_matrix(formfactor_functional(ev, label), family, threads);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r.gram.H, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    r.pass = r.min_eigenvalue >= -1e-8 * norm;
    return r;
}

} // namespace qftscat
