#pragma once
#include <unordered_map>

#include "qsc/fock.hpp"

namespace qsc {

// four pairwise disjoint cell sets labelling one kernel table:
// k00 preserved, k0p created, km0 annihilated, kmp scalar (time) cells
struct TableKey {
    mask_t k00 = 0, k0p = 0, km0 = 0, kmp = 0;
    bool operator==(const TableKey&) const = default;
    mask_t all() const { return k00 | k0p | km0 | kmp; }
    bool disjoint() const {
        return popcount(k00) + popcount(k0p) + popcount(km0) + popcount(kmp) ==
               popcount(all());
    }
};

struct TableKeyHash {
    std::size_t operator()(const TableKey& k) const {
        std::uint64_t a = (std::uint64_t(k.k00) << 32) | k.k0p;
        std::uint64_t b = (std::uint64_t(k.km0) << 32) | k.kmp;
        a ^= b * 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
        return std::size_t(a * 0xc2b2ae3d27d4eb4full);
    }
};

// block at a table: rows (h, k00 asc, k0p asc), cols (h, km0 asc, k00 asc),
// h slowest, last leg fastest
struct Kernel {
    Grid g;
    std::unordered_map<TableKey, Mat, TableKeyHash> tab;

    void add(const TableKey& k, const Mat& block);
    const Mat* find(const TableKey& k) const {
        auto it = tab.find(k);
        return it == tab.end() ? nullptr : &it->second;
    }
};

long kernelOutDim(const Grid& g, const TableKey& k);
long kernelInDim(const Grid& g, const TableKey& k);

// Wick kernel of the identity operator: identity block on every pure-k00 table
Kernel unitKernel(const Grid& g);

// T*: block at (k00,k0p,km0,kmp) is the adjoint of the block at (k00,km0,k0p,kmp)
// with leg groups permuted back to canonical order
Kernel involution(const Kernel& T);

// result(k) for k = k00 u k0p, summing annihilated and scalar chains outside k
// with weight dt^{|km0|+|kmp|}
FockVector epsilonApply(const Kernel& T, const FockVector& a);
Mat epsilonMatrix(const Kernel& T, const FockIndexer& ix);

// composition kernel of eps(S) eps(T) up to O(dt): contraction over transferred
// legs, matched by cell, with no dt weight
Kernel kernelProduct(const Kernel& S, const Kernel& T);

// per-cell positive weights for the four table roles
struct Zeta {
    std::vector<double> z00, z0p, zm0, zmp;
};

Zeta zetaStar(const Zeta& z);  // flip z0p <-> zm0

// per-cell product of the triangular weight matrices with unit corners:
// r00 = a00 b00, r0p = a00 b0p + a0p, rm0 = am0 b00 + bm0,
// rmp = am0 b0p + amp + bmp
Zeta zetaProduct(const Zeta& a, const Zeta& b);

// max over tables of ||block||_2 / prod of role weights
double zetaNorm(const Kernel& T, const Zeta& z);

struct OperatorBound {
    double bound;
    double eps;
};

// exp{ ||zmp||_1 + (||zm0||_2^2 + ||z0p||_2^2)/(2 eps) } * prefactor, with eps the
// smaller root gap of the (xi+, xi-) quadratic; requires xi+ xi- > ||z00||_inf^2
OperatorBound zetaExponentBound(const Grid& g, const Zeta& z, double prefactor,
                                double xi_plus, double xi_minus);

// the same with prefactor zetaNorm(T, z)
OperatorBound epsilonOperatorBound(const Kernel& T, const Zeta& z, double xi_plus,
                                   double xi_minus);

// block tensor identity on added preserved cells (paired row/col legs)
Mat extendByIdentity(const Grid& g, const TableKey& key, const Mat& block, mask_t add);

// Wick dressing: T(k) = sum over c inside k00 of L(k00 minus c, ...) x I(c);
// cells at or after t must lie in the identity part
Kernel wickFromIntegrand(const Kernel& L, double t);

// inverse dressing: L(k) = sum over c inside k00 of (-1)^|c| T(k00 minus c, ...) x I(c)
Kernel integrandFromWick(const Kernel& T);

}  // namespace qsc
