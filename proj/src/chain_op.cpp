#include "qsc/chain_op.hpp"

namespace qsc {

Vec LocalChainOp::apply(const Vec& v) const {
    long H = g.dim_h;
    long nsec = long(1) << g.n_cells;
    Vec w = v;
    for (long S = 0; S < nsec; ++S) w.segment(S * H, H) = base * w.segment(S * H, H);
    Vec x(2 * H), y(2 * H);
    for (int c = 0; c < g.n_cells; ++c) {
        mask_t bit = mask_t(1) << c;
        const Mat& M = m[c];
        for (long S = 0; S < nsec; ++S) {
            if (S & bit) continue;
            x.head(H) = w.segment(S * H, H);
            x.tail(H) = w.segment((S | bit) * H, H);
            y.noalias() = M * x;
            w.segment(S * H, H) = y.head(H);
            w.segment((S | bit) * H, H) = y.tail(H);
        }
    }
    return w;
}

Vec LocalChainOp::applyAdjoint(const Vec& v) const {
    long H = g.dim_h;
    long nsec = long(1) << g.n_cells;
    Vec w = v;
    Vec x(2 * H), y(2 * H);
    for (int c = g.n_cells - 1; c >= 0; --c) {
        mask_t bit = mask_t(1) << c;
        Mat M = m[c].adjoint();
        for (long S = 0; S < nsec; ++S) {
            if (S & bit) continue;
            x.head(H) = w.segment(S * H, H);
            x.tail(H) = w.segment((S | bit) * H, H);
            y.noalias() = M * x;
            w.segment(S * H, H) = y.head(H);
            w.segment((S | bit) * H, H) = y.tail(H);
        }
    }
    Mat b = base.adjoint();
    for (long S = 0; S < nsec; ++S) w.segment(S * H, H) = b * w.segment(S * H, H);
    return w;
}

LocalChainOp localChain(const Grid& g, const std::vector<PointMatrix>& F,
                        const Mat& U0, double t) {
    if (g.d != 1) throw std::invalid_argument("localChain needs multiplicity 1");
    long H = g.dim_h;
    LocalChainOp op{g, U0, {}};
    for (int c = 0; c < g.n_cells; ++c) {
        Mat M = Mat::Identity(2 * H, 2 * H);
        if (g.timeOf(c) < t - 1e-12) {
            M.block(0, 0, H, H) = Mat::Identity(H, H) + g.dt() * F[c].fmp;
            M.block(0, H, H, H) = g.dt() * F[c].fm0;
            M.block(H, 0, H, H) = F[c].f0p;
            M.block(H, H, H, H) = F[c].f00;
        }
        op.m.push_back(M);
    }
    return op;
}

double powerNorm(const std::function<Vec(const Vec&)>& apply,
                 const std::function<Vec(const Vec&)>& applyAdjoint, long dim,
                 Rng& rng, int iters) {
    Vec v = rng.vec(dim);
    v /= v.norm();
    double s = 0;
    for (int i = 0; i < iters; ++i) {
        Vec w = apply(v);
        s = w.norm();
        Vec u = applyAdjoint(w);
        double un = u.norm();
        if (un < 1e-300) return 0.0;
        v = u / un;
    }
    return s;
}

double multiplicativityDefectChain(const Grid& g, const std::vector<PointMatrix>& F,
                                   const std::vector<PointMatrix>& G, const Mat& XF,
                                   const Mat& XG, double xi_plus, double xi_minus,
                                   Rng& rng, int iters) {
    double past = g.horizon + 1;
    LocalChainOp A = localChain(g, F, XF, past);
    LocalChainOp B = localChain(g, G, XG, past);
    std::vector<PointMatrix> P;
    P.reserve(g.n_cells);
    for (int c = 0; c < g.n_cells; ++c) P.push_back(pointProduct(F[c], G[c]));
    LocalChainOp C = localChain(g, P, Mat(XF * XG), past);
    long n = A.dim();
    Eigen::VectorXd dp(n), dm(n);
    for (long s = 0; s < n; ++s) {
        int occ = popcount(mask_t(s / g.dim_h));
        dp[s] = std::pow(xi_plus * g.dt(), 0.5 * occ);
        dm[s] = std::pow(xi_minus * g.dt(), 0.5 * occ);
    }
    auto defect = [&](const Vec& v) -> Vec {
        Vec r = dp.cwiseInverse().asDiagonal() * v;
        Vec out = A.apply(B.apply(r)) - C.apply(r);
        return dm.asDiagonal() * out;
    };
    auto defectAdj = [&](const Vec& v) -> Vec {
        Vec r = dm.asDiagonal() * v;
        Vec out = B.applyAdjoint(A.applyAdjoint(r)) - C.applyAdjoint(r);
        return dp.cwiseInverse().asDiagonal() * out;
    };
    return powerNorm(defect, defectAdj, n, rng, iters);
}

}  // namespace qsc
