#include "qsc/evolution.hpp"

namespace qsc {

Mat liftInitial(const FockIndexer& ix, const Mat& U0) {
    const Grid& g = ix.g;
    Mat M = Mat::Zero(ix.total, ix.total);
    for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S) {
        long dl = g.sectorDim(S) / g.dim_h;
        for (int h = 0; h < g.dim_h; ++h)
            for (int h2 = 0; h2 < g.dim_h; ++h2)
                for (long l = 0; l < dl; ++l)
                    M(ix.offset[S] + h * dl + l, ix.offset[S] + h2 * dl + l) =
                        U0(h, h2);
    }
    return M;
}

Mat liftPointBlock(const FockIndexer& ix, const Mat& blk, bool rowLeg, bool colLeg) {
    const Grid& g = ix.g;
    int dro = rowLeg ? g.d : 1, dci = colLeg ? g.d : 1;
    Mat M = Mat::Zero(ix.total * dro, ix.total * dci);
    for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S) {
        long dl = g.sectorDim(S) / g.dim_h;
        for (int h = 0; h < g.dim_h; ++h)
            for (int h2 = 0; h2 < g.dim_h; ++h2)
                for (long l = 0; l < dl; ++l)
                    for (int eo = 0; eo < dro; ++eo)
                        for (int ei = 0; ei < dci; ++ei)
                            M((ix.offset[S] + h * dl + l) * dro + eo,
                              (ix.offset[S] + h2 * dl + l) * dci + ei) =
                                blk(h * dro + eo, h2 * dci + ei);
    }
    return M;
}

Mat extractLeg(const FockIndexer& ix, int x) {
    const Grid& g = ix.g;
    mask_t xbit = mask_t(1) << x;
    Mat E = Mat::Zero(ix.total * g.d, ix.total);
    for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S) {
        if (S & xbit) continue;
        mask_t sec = S | xbit;
        std::vector<int> dest = cellsOf(S);
        dest.push_back(x);
        std::vector<long> m = legRemap(g.dim_h, g.d, cellsOf(sec), dest);
        for (long df = 0; df < long(m.size()); ++df)
            E((ix.offset[S] + df / g.d) * g.d + df % g.d,
              ix.offset[sec] + m[df]) = 1.0;
    }
    return E;
}

Mat outsideProjector(const FockIndexer& ix, int x) {
    const Grid& g = ix.g;
    mask_t xbit = mask_t(1) << x;
    Mat P = Mat::Zero(ix.total, ix.total);
    for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S)
        if (!(S & xbit))
            P.block(ix.offset[S], ix.offset[S], g.sectorDim(S), g.sectorDim(S))
                .setIdentity();
    return P;
}

Mat incrementMatrix(const FockIndexer& ix, PointRole role, const Mat& D, int x) {
    Mat E = extractLeg(ix, x);
    switch (role) {
        case PointRole::gauge:
            return E.transpose() * D * E;
        case PointRole::creation:
            return E.transpose() * D;
        case PointRole::annihilation:
            return ix.g.dt() * (outsideProjector(ix, x) * D * E);
        default:
            return ix.g.dt() * (outsideProjector(ix, x) * D);
    }
}

Mat measureAdjoint(const FockIndexer& ix, const Mat& M) {
    const Grid& g = ix.g;
    Eigen::VectorXd w(ix.total);
    for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S)
        for (long i = 0; i < g.sectorDim(S); ++i)
            w[ix.offset[S] + i] = std::pow(g.dt(), popcount(S));
    return w.cwiseInverse().asDiagonal() * M.adjoint() * w.asDiagonal();
}

Mat evolve(const Grid& g, const FockIndexer& ix, const std::vector<PointMatrix>& F,
           const Mat& U0, double t) {
    return epsilonMatrix(chronoKernel(g, F, U0, t), ix);
}

static Mat cellFactorIncrement(const FockIndexer& ix, const PointMatrix& B, int x) {
    return incrementMatrix(ix, PointRole::gauge, liftPointBlock(ix, B.f00, 1, 1), x) +
           incrementMatrix(ix, PointRole::creation, liftPointBlock(ix, B.f0p, 1, 0), x) +
           incrementMatrix(ix, PointRole::annihilation, liftPointBlock(ix, B.fm0, 0, 1), x) +
           incrementMatrix(ix, PointRole::time_, liftPointBlock(ix, B.fmp, 0, 0), x);
}

Mat eulerEvolve(const Grid& g, const FockIndexer& ix,
                const std::vector<PointMatrix>& F, const Mat& U0, double t) {
    Mat U = liftInitial(ix, U0);
    PointMatrix id = identityPoint(g.dim_h, g.d);
    for (int x = 0; x < g.n_cells; ++x) {
        if (!(g.timeOf(x) < t - 1e-12)) break;
        PointMatrix B = pointAdd(F[x], pointScale(-1.0, id));
        U += cellFactorIncrement(ix, B, x) * U;
    }
    return U;
}

double unitarityDefect(const FockIndexer& ix, const Mat& U, double xi_plus,
                       double xi_minus) {
    Mat M = measureAdjoint(ix, U) * U;
    return relativeNorm(ix, M - Mat::Identity(ix.total, ix.total), xi_plus,
                        xi_minus);
}

double unitarityDefectChain(const LocalChainOp& U, double xi_plus, double xi_minus,
                            Rng& rng, int iters) {
    const Grid& g = U.g;
    long n = U.dim();
    Eigen::VectorXd w(n), dp(n), dm(n);
    for (long s = 0; s < n; ++s) {
        int occ = popcount(mask_t(s / g.dim_h));
        w[s] = std::pow(g.dt(), occ);
        dp[s] = std::pow(xi_plus * g.dt(), 0.5 * occ);
        dm[s] = std::pow(xi_minus * g.dt(), 0.5 * occ);
    }
    auto defect = [&](const Vec& v) -> Vec {
        Vec r = dp.cwiseInverse().asDiagonal() * v;
        Vec r0 = r;
        r = U.apply(r);
        r = w.asDiagonal() * r;
        r = U.applyAdjoint(r);
        r = w.cwiseInverse().asDiagonal() * r;
        return dm.asDiagonal() * Vec(r - r0);
    };
    auto defectAdj = [&](const Vec& v) -> Vec {
        Vec r = dm.asDiagonal() * v;
        Vec r0 = r;
        r = w.cwiseInverse().asDiagonal() * r;
        r = U.apply(r);
        r = w.asDiagonal() * r;
        r = U.applyAdjoint(r);
        return dp.cwiseInverse().asDiagonal() * Vec(r - r0);
    };
    return powerNorm(defect, defectAdj, n, rng, iters);
}

Vec chainIncrementApply(const Grid& g, const PointMatrix& B, int x, const Vec& v) {
    if (g.d != 1) throw std::logic_error("chainIncrementApply needs d == 1");
    int h = g.dim_h;
    mask_t xbit = mask_t(1) << x;
    Vec out = Vec::Zero(v.size());
    for (mask_t occ = 0; occ <= g.full(); ++occ) {
        if (occ & xbit) {
            out.segment(occ * h, h) += B.f00 * v.segment(occ * h, h);
        } else {
            mask_t up = occ | xbit;
            out.segment(up * h, h) += B.f0p * v.segment(occ * h, h);
            out.segment(occ * h, h) += g.dt() * (B.fm0 * v.segment(up * h, h));
            out.segment(occ * h, h) += g.dt() * (B.fmp * v.segment(occ * h, h));
        }
    }
    return out;
}

static PointMatrix itoDefectGenerator(const Grid& g, const PointMatrix& F) {
    return pointAdd(pointProduct(pseudoConjugate(F), F),
                    pointScale(-1.0, identityPoint(g.dim_h, g.d)));
}

double itoFormulaCheck(const Grid& g, const FockIndexer& ix,
                       const std::vector<PointMatrix>& F, const Mat& U0,
                       double xi_plus, double xi_minus) {
    double worst = 0;
    PointMatrix id = identityPoint(g.dim_h, g.d);
    Mat Uk = liftInitial(ix, U0);
    Mat Ak = measureAdjoint(ix, Uk) * Uk;
    for (int x = 0; x < g.n_cells; ++x) {
        Mat Un = Uk + cellFactorIncrement(ix, pointAdd(F[x], pointScale(-1.0, id)), x) * Uk;
        Mat An = measureAdjoint(ix, Un) * Un;
        Mat inc = cellFactorIncrement(ix, itoDefectGenerator(g, F[x]), x);
        Mat rhs = measureAdjoint(ix, Uk) * inc * Uk;
        worst = std::max(worst, relativeNorm(ix, An - Ak - rhs, xi_plus, xi_minus));
        Uk = std::move(Un);
        Ak = std::move(An);
    }
    return worst;
}

double itoFormulaDefectChain(const Grid& g, const std::vector<PointMatrix>& F,
                             const Mat& U0, double xi_plus, double xi_minus,
                             int nvec, Rng& rng) {
    long n = (long(1) << g.n_cells) * g.dim_h;
    Eigen::VectorXd w(n), dp(n), dm(n);
    for (long s = 0; s < n; ++s) {
        int occ = popcount(mask_t(s / g.dim_h));
        w[s] = std::pow(g.dt(), occ);
        dp[s] = std::pow(xi_plus * g.dt(), 0.5 * occ);
        dm[s] = std::pow(xi_minus * g.dt(), 0.5 * occ);
    }
    auto starApply = [&](const LocalChainOp& U, const Vec& v) -> Vec {
        return w.cwiseInverse().asDiagonal() *
               Vec(U.applyAdjoint(w.asDiagonal() * v));
    };
    double worst = 0;
    for (int x = 0; x < g.n_cells; ++x) {
        LocalChainOp Uk = localChain(g, F, U0, g.timeOf(x));
        LocalChainOp Un = localChain(g, F, U0, g.timeOf(x) + g.dt());
        PointMatrix B = itoDefectGenerator(g, F[x]);
        for (int j = 0; j < nvec; ++j) {
            Vec v = rng.vec(n);
            v /= v.norm();
            Vec u = dp.cwiseInverse().asDiagonal() * v;
            Vec lhs = starApply(Un, Un.apply(u)) - starApply(Uk, Uk.apply(u));
            Vec rhs = starApply(Uk, chainIncrementApply(g, B, x, Uk.apply(u)));
            worst = std::max(worst, (dm.asDiagonal() * Vec(lhs - rhs)).norm());
        }
    }
    return worst;
}

}  // namespace qsc
