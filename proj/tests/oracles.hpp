#pragma once
// brute-force reference implementations used only by tests
#include <unsupported/Eigen/MatrixFunctions>

#include "qsc/kernel.hpp"
#include "qsc/point_matrix.hpp"

namespace oracle {

using namespace qsc;

// dense exponential of the full triangular one-point block matrix -i H
inline PointMatrix pointExpDense(const PointMatrix& h) {
    long hh = h.fmp.rows(), hd = h.f00.rows();
    long n = hh + hd + hh;
    Mat B = Mat::Zero(n, n);
    B.block(0, hh, hh, hd) = h.fm0;
    B.block(0, hh + hd, hh, hh) = h.fmp;
    B.block(hh, hh, hd, hd) = h.f00;
    B.block(hh, hh + hd, hd, hh) = h.f0p;
    Mat E = (cxd(0, -1) * B).exp();
    return {E.block(hh, hh, hd, hd), E.block(hh, hh + hd, hd, hh),
            E.block(0, hh, hh, hd), E.block(0, hh + hd, hh, hh)};
}

// direct sector-by-sector evaluation of the kernel action, nested loops over
// the two outside chains, no shared code with epsilonApply
inline FockVector epsilonApplyBrute(const Kernel& T, const FockVector& a) {
    const Grid& g = T.g;
    FockVector out = zeroFock(g);
    mask_t nsec = mask_t(1) << g.n_cells;
    for (mask_t kk = 0; kk < nsec; ++kk) {  // output sector
        for (mask_t k00 = kk;; k00 = (k00 - 1) & kk) {
            mask_t k0p = kk & ~k00;
            mask_t outside = g.full() & ~kk;
            for (mask_t km0 = outside;; km0 = (km0 - 1) & outside) {
                mask_t rest = outside & ~km0;
                for (mask_t kmp = rest;; kmp = (kmp - 1) & rest) {
                    const Mat* B = T.find({k00, k0p, km0, kmp});
                    if (B) {
                        double w =
                            std::pow(g.dt(), popcount(km0) + popcount(kmp));
                        mask_t U = km0 | k00;
                        std::vector<int> bi = cellsOf(km0), t2 = cellsOf(k00);
                        bi.insert(bi.end(), t2.begin(), t2.end());
                        std::vector<long> cm = legRemap(g.dim_h, g.d, bi, cellsOf(U));
                        std::vector<int> bo = cellsOf(k00), t3 = cellsOf(k0p);
                        bo.insert(bo.end(), t3.begin(), t3.end());
                        std::vector<long> rm = legRemap(g.dim_h, g.d, bo, cellsOf(kk));
                        for (long r = 0; r < g.sectorDim(kk); ++r)
                            for (long c = 0; c < g.sectorDim(U); ++c)
                                out[kk][r] += w * (*B)(rm[r], cm[c]) * a[U][c];
                    }
                    if (kmp == 0) break;
                }
                if (km0 == 0) break;
            }
            if (k00 == 0) break;
        }
    }
    return out;
}

inline Kernel randomKernel(const Grid& g, Rng& rng, int ntables) {
    Kernel T{g, {}};
    for (int i = 0; i < ntables; ++i) {
        TableKey k;
        for (int c = 0; c < g.n_cells; ++c) {
            double u = rng.uniform();
            mask_t bit = mask_t(1) << c;
            if (u < 0.4) continue;
            else if (u < 0.55) k.k00 |= bit;
            else if (u < 0.7) k.k0p |= bit;
            else if (u < 0.85) k.km0 |= bit;
            else k.kmp |= bit;
        }
        T.add(k, rng.mat(kernelOutDim(g, k), kernelInDim(g, k)));
    }
    return T;
}

// diagonal of the chain measure weights dt^|S| over the dense index
inline Eigen::VectorXd chainWeights(const FockIndexer& ix) {
    Eigen::VectorXd w(ix.total);
    for (mask_t S = 0; S < (mask_t(1) << ix.g.n_cells); ++S)
        for (long i = 0; i < ix.g.sectorDim(S); ++i)
            w[ix.offset[S] + i] = std::pow(ix.g.dt(), popcount(S));
    return w;
}

}  // namespace oracle
