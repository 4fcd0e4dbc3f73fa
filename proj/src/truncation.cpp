#include "qftscat/truncation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <random>
#include <string>

namespace qftscat {

namespace {

constexpr int kMaxPartitionN = 12;
constexpr int kCachedN = 8;

// Restricted growth strings in lexicographic order.
std::vector<Partition> build_partitions(int n) {
    std::vector<Partition> out;
    if (n == 0) {
        out.push_back(Partition{});
        return out;
    }
    std::vector<int> a(n, 0);
    while (true) {
        Partition p;
        int blocks = 0;
        for (int v : a) blocks = std::max(blocks, v + 1);
        p.blocks.assign(blocks, {});
        for (int i = 0; i < n; ++i) p.blocks[a[i]].push_back(i);
        out.push_back(std::move(p));
        // Rightmost position that may grow: a[i] <= max(a[0..i-1]).
        int i = n - 1;
        while (i > 0) {
            int m = 0;
            for (int j = 0; j < i; ++j) m = std::max(m, a[j]);
            if (a[i] <= m) break;
            --i;
        }
        if (i == 0) break;
        ++a[i];
        for (int j = i + 1; j < n; ++j) a[j] = 0;
    }
    return out;
}

void check_partition_n(int n) {
    if (n < 0 || n > kMaxPartitionN) {
        throw InvalidArgument("partition order out of range 0..12: " + std::to_string(n));
    }
}

void check_order(int n, int max_order) {
    if (n > max_order) {
        throw InvalidArgument("order " + std::to_string(n) + " exceeds maxOrder " + std::to_string(max_order));
    }
}

// Points of `all` selected by a bitmask, in natural order.
std::vector<FourVector> select(std::span<const FourVector> all, unsigned mask) {
    std::vector<FourVector> out;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (mask & (1u << i)) out.push_back(all[i]);
    return out;
}

// Cumulant recursion over subsets: T(X) = M(X) - sum_{lambda != {X}} prod T(blocks).
template <class Moment>
cplx cumulant_of_full_set(int n, Moment&& moment) {
    const unsigned full = (1u << n) - 1u;
    std::vector<cplx> t(full + 1u, cplx(0.0, 0.0));
    std::vector<unsigned> masks;
    for (unsigned s = 1; s <= full; ++s) masks.push_back(s);
    std::stable_sort(masks.begin(), masks.end(),
                     [](unsigned a, unsigned b) { return std::popcount(a) < std::popcount(b); });
    for (unsigned s : masks) {
        std::array<int, 32> members{};
        int k = 0;
        for (int i = 0; i < n; ++i)
            if (s & (1u << i)) members[k++] = i;
        cplx lower{0.0, 0.0};
        for (const Partition& p : enumerate_partitions(k)) {
            if (p.size() == 1) continue;
            cplx prod{1.0, 0.0};
            for (const auto& b : p.blocks) {
                unsigned bm = 0;
                for (int idx : b) bm |= 1u << members[idx];
                prod *= t[bm];
            }
            lower += prod;
        }
        t[s] = moment(s) - lower;
    }
    return t[full];
}

} // namespace

const std::vector<Partition>& enumerate_partitions(int n) {
    check_partition_n(n);
    static const std::vector<std::vector<Partition>> cache = [] {
        std::vector<std::vector<Partition>> c;
        for (int k = 0; k <= kCachedN; ++k) c.push_back(build_partitions(k));
        return c;
    }();
    if (n <= kCachedN) return cache[n];
    thread_local std::vector<Partition> scratch;
    scratch = build_partitions(n);
    return scratch;
}

std::uint64_t bell_number(int n) {
    check_partition_n(n);
    // Bell triangle.
    std::vector<std::uint64_t> row{1};
    for (int i = 0; i < n; ++i) {
        std::vector<std::uint64_t> next{row.back()};
        for (auto v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

cplx KernelFunctional::operator()(std::span<const FourVector> points) const {
    const int n = static_cast<int>(points.size());
    if (n == 0) return w0;
    check_order(n, max_order);
    if (n > static_cast<int>(kernels.size()) || !kernels[n - 1]) return {0.0, 0.0};
    return kernels[n - 1](points);
}

cplx BilinearKernel::operator()(std::span<const FourVector> left, std::span<const FourVector> right) const {
    const int r = static_cast<int>(left.size());
    const int q = static_cast<int>(right.size());
    if (r == 0 && q == 0) return s00;
    check_order(r + q, max_order);
    auto it = components.find({r, q});
    if (it == components.end() || !it->second) return {0.0, 0.0};
    return it->second(left, right);
}

KernelFunctional random_kernel_family(int max_order, int d, std::uint64_t seed) {
    if (max_order < 0 || d < 1 || d > kMaxDim) throw InvalidArgument("random kernel family: bad order or dimension");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    KernelFunctional w;
    w.max_order = max_order;
    w.w0 = 1.0;
    for (int n = 1; n <= max_order; ++n) {
        struct Term {
            cplx c;
            std::vector<double> a;  // phase slopes, n*d
            std::vector<double> b;  // per-leg decay
        };
        std::vector<Term> terms(2);
        for (auto& t : terms) {
            t.c = 0.5 * cplx(u(rng), u(rng));
            for (int i = 0; i < n * d; ++i) t.a.push_back(u(rng));
            for (int l = 0; l < n; ++l) t.b.push_back(0.1 + 0.2 * (u(rng) + 1.0));
        }
        w.kernels.push_back([terms, d](std::span<const FourVector> k) {
            // O(1) offset keeps |W_n| away from zero, so relative errors stay meaningful.
            cplx s{1.0, 0.0};
            for (const auto& t : terms) {
                double phase = 0.0;
                double decay = 0.0;
                for (std::size_t l = 0; l < k.size(); ++l) {
                    for (int c = 0; c < d; ++c) phase += t.a[l * static_cast<std::size_t>(d) + c] * k[l][c];
                    decay += t.b[l] * k[l].euclidean_norm2();
                }
                s += t.c * std::exp(cplx(-decay, phase));
            }
            return s;
        });
    }
    return w;
}

KernelFunctional truncate(const KernelFunctional& w) {
    KernelFunctional out;
    out.max_order = w.max_order;
    out.w0 = {0.0, 0.0};
    for (int n = 1; n <= w.max_order; ++n) {
        out.kernels.push_back([w, n](std::span<const FourVector> pts) {
            if (static_cast<int>(pts.size()) != n) throw InvalidArgument("kernel arity mismatch");
            return cumulant_of_full_set(n, [&](unsigned mask) {
                const auto sub = select(pts, mask);
                return w(sub);
            });
        });
    }
    return out;
}

KernelFunctional untruncate(const KernelFunctional& wt) {
    KernelFunctional out;
    out.max_order = wt.max_order;
    out.w0 = {1.0, 0.0};
    for (int n = 1; n <= wt.max_order; ++n) {
        out.kernels.push_back([wt, n](std::span<const FourVector> pts) {
            if (static_cast<int>(pts.size()) != n) throw InvalidArgument("kernel arity mismatch");
            std::vector<FourVector> sub;
            return sum_over_partitions(n, [&](std::span<const int> block) {
                sub.clear();
                for (int i : block) sub.push_back(pts[i]);
                return wt(sub);
            });
        });
    }
    return out;
}

namespace {

// Splits the points of a bitmask into the left (index < r) and right groups.
void split(std::span<const FourVector> left, std::span<const FourVector> right, unsigned mask,
           std::vector<FourVector>& l, std::vector<FourVector>& q) {
    l.clear();
    q.clear();
    const std::size_t r = left.size();
    for (std::size_t i = 0; i < r + right.size(); ++i) {
        if (!(mask & (1u << i))) continue;
        if (i < r)
            l.push_back(left[i]);
        else
            q.push_back(right[i - r]);
    }
}

} // namespace

BilinearKernel truncate_bilinear(const BilinearKernel& s) {
    BilinearKernel out;
    out.max_order = s.max_order;
    for (int r = 0; r <= s.max_order; ++r)
        for (int q = 0; r + q <= s.max_order; ++q) {
            if (r + q == 0) continue;
            out.components[{r, q}] = [s, r, q](std::span<const FourVector> left, std::span<const FourVector> right) {
                if (static_cast<int>(left.size()) != r || static_cast<int>(right.size()) != q)
                    throw InvalidArgument("bilinear kernel arity mismatch");
                std::vector<FourVector> l;
                std::vector<FourVector> rr;
                return cumulant_of_full_set(r + q, [&](unsigned mask) {
                    split(left, right, mask, l, rr);
                    return s(l, rr);
                });
            };
        }
    return out;
}

BilinearKernel untruncate_bilinear(const BilinearKernel& st) {
    BilinearKernel out;
    out.max_order = st.max_order;
    out.s00 = {1.0, 0.0};
    for (int r = 0; r <= st.max_order; ++r)
        for (int q = 0; r + q <= st.max_order; ++q) {
            if (r + q == 0) continue;
            out.components[{r, q}] = [st, r, q](std::span<const FourVector> left, std::span<const FourVector> right) {
                std::vector<FourVector> l;
                std::vector<FourVector> rr;
                return sum_over_partitions(r + q, [&](std::span<const int> block) {
                    unsigned mask = 0;
                    for (int i : block) mask |= 1u << i;
                    split(left, right, mask, l, rr);
                    return st(l, rr);
                });
            };
        }
    return out;
}

BilinearKernel tensor_embedding(const KernelFunctional& w) {
    BilinearKernel out;
    out.max_order = w.max_order;
    out.s00 = w.w0;
    for (int r = 0; r <= w.max_order; ++r)
        for (int q = 0; r + q <= w.max_order; ++q) {
            if (r + q == 0) continue;
            out.components[{r, q}] = [w](std::span<const FourVector> left, std::span<const FourVector> right) {
                std::vector<FourVector> all(left.begin(), left.end());
                all.insert(all.end(), right.begin(), right.end());
                return w(all);
            };
        }
    return out;
}

KernelFunctional apply_leg_multiplier(const KernelFunctional& w, PointMultiplier a) {
    KernelFunctional out;
    out.max_order = w.max_order;
    out.w0 = w.w0;
    for (int n = 1; n <= w.max_order; ++n) {
        out.kernels.push_back([w, a](std::span<const FourVector> pts) {
            cplx v = w(pts);
            for (const auto& p : pts) v *= a(p);
            return v;
        });
    }
    return out;
}

} // namespace qftscat
