#pragma once
#include "qsc/point_matrix.hpp"

namespace qsc {

// matrix-free evolution operator for d == 1: the action of a factorized kernel
// is the chronological product of per-cell local operators on H x C^2,
// state index s = occ * dim_h + h, with
//   m[occ][occ] = f00, m[occ][emp] = f0p, m[emp][occ] = dt fm0,
//   m[emp][emp] = I + dt fmp
struct LocalChainOp {
    Grid g;
    Mat base;            // dim_h x dim_h, applied first
    std::vector<Mat> m;  // per cell, (2 dim_h) x (2 dim_h)

    Vec apply(const Vec& v) const;
    Vec applyAdjoint(const Vec& v) const;
    long dim() const { return (long(1) << g.n_cells) * g.dim_h; }
};

LocalChainOp localChain(const Grid& g, const std::vector<PointMatrix>& F,
                        const Mat& U0, double t);

// ||A||_2 by power iteration on A^dag A over matrix-free applies
double powerNorm(const std::function<Vec(const Vec&)>& apply,
                 const std::function<Vec(const Vec&)>& applyAdjoint, long dim,
                 Rng& rng, int iters = 120);

// weighted defect of composing two d == 1 factorized evolutions against the
// single evolution driven by the per-cell triangular products:
// || D_- (chain(F) chain(G) - chain(F G)) D_+^{-1} ||_2 with
// D_xi = diag sqrt(xi dt)^occ, by power iteration
double multiplicativityDefectChain(const Grid& g, const std::vector<PointMatrix>& F,
                                   const std::vector<PointMatrix>& G, const Mat& XF,
                                   const Mat& XG, double xi_plus, double xi_minus,
                                   Rng& rng, int iters = 120);

}  // namespace qsc
