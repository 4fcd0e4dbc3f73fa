#pragma once

#include "qftscat/kinematics.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace qftscat {

// Set partition of {0..n-1}; blocks are increasing and ordered by their first element.
struct Partition {
    std::vector<std::vector<int>> blocks;
    std::size_t size() const { return blocks.size(); }
};

// All partitions of {0..n-1}, 0 <= n <= 12. Cached for n <= 8.
const std::vector<Partition>& enumerate_partitions(int n);
std::uint64_t bell_number(int n);

using Kernel = std::function<cplx(std::span<const FourVector>)>;

// Family of point-evaluable n-point kernels W_1..W_N plus the scalar W_0.
struct KernelFunctional {
    int max_order = 6;
    cplx w0{0.0, 0.0};
    std::vector<Kernel> kernels;  // kernels[n-1] is W_n; empty entries mean zero

    cplx operator()(std::span<const FourVector> points) const;
};

using BilinearComponent = std::function<cplx(std::span<const FourVector>, std::span<const FourVector>)>;

// Components S_{r,q}(x_1..x_r; y_1..y_q), r+q <= N. Missing components are zero.
struct BilinearKernel {
    int max_order = 6;
    cplx s00{0.0, 0.0};
    std::map<std::pair<int, int>, BilinearComponent> components;

    cplx operator()(std::span<const FourVector> left, std::span<const FourVector> right) const;
};

// W_0 = 1 and smooth, non-symmetric complex kernels W_1..W_N (1 plus two seeded random
// Gaussian-times-phase terms).
KernelFunctional random_kernel_family(int max_order, int d, std::uint64_t seed);

KernelFunctional truncate(const KernelFunctional& w);
KernelFunctional untruncate(const KernelFunctional& wt);

BilinearKernel truncate_bilinear(const BilinearKernel& s);
BilinearKernel untruncate_bilinear(const BilinearKernel& st);
// S_{r,q}(x; y) = W_{r+q}(x, y).
BilinearKernel tensor_embedding(const KernelFunctional& w);

using PointMultiplier = std::function<cplx(const FourVector&)>;
// (W A)_n(p) = W_n(p) prod_i A(p_i); W_0 unchanged.
KernelFunctional apply_leg_multiplier(const KernelFunctional& w, PointMultiplier a);

// Sum over partitions of {0..n-1} of the product of block(indices) over blocks.
template <class BlockFn>
cplx sum_over_partitions(int n, BlockFn&& block) {
    cplx total{0.0, 0.0};
    for (const Partition& p : enumerate_partitions(n)) {
        cplx prod{1.0, 0.0};
        for (const auto& b : p.blocks) {
            prod *= block(std::span<const int>(b));
            if (prod == cplx(0.0, 0.0)) break;
        }
        total += prod;
    }
    return total;
}

} // namespace qftscat
