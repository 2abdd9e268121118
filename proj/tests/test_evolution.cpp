#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"
#include "qsc/evolution.hpp"

using namespace qsc;

namespace {

std::vector<PointMatrix> randomFactors(const Grid& g, Rng& rng, double scale) {
    std::vector<PointMatrix> F;
    long hd = g.dim_h * g.d;
    for (int c = 0; c < g.n_cells; ++c)
        F.push_back(PointMatrix{rng.mat(hd, hd), scale * rng.mat(hd, g.dim_h),
                                scale * rng.mat(g.dim_h, hd),
                                scale * rng.mat(g.dim_h, g.dim_h)});
    return F;
}

std::vector<PointMatrix> constantHp(const Grid& g, Rng& rng) {
    long hd = g.dim_h * g.d;
    Mat W = rng.unitary(hd), L = 0.6 * rng.mat(hd, g.dim_h),
        H = rng.hermitian(g.dim_h);
    return std::vector<PointMatrix>(g.n_cells, hpParametrize(W, L, H));
}

}  // namespace

TEST_CASE("factorized evolution and the stepwise increments agree") {
    Grid g{1.0, 3, 2, 2};
    FockIndexer ix(g);
    Rng rng(57);
    std::vector<PointMatrix> F = randomFactors(g, rng, 1.0);
    Mat U0 = rng.mat(g.dim_h, g.dim_h);
    for (double t : {0.4, g.horizon}) {
        Mat A = evolve(g, ix, F, U0, t);
        Mat B = eulerEvolve(g, ix, F, U0, t);
        CHECK((A - B).norm() < 1e-12 * std::max(1.0, A.norm()));
    }
}

TEST_CASE("dense increment matrices match the vector-level single cell") {
    Grid g{1.0, 3, 2, 2};
    FockIndexer ix(g);
    Rng rng(61);
    Vec a = rng.vec(ix.total);
    int x = 1;
    for (PointRole role : {PointRole::gauge, PointRole::creation,
                           PointRole::annihilation, PointRole::time_}) {
        bool inLeg = role == PointRole::gauge || role == PointRole::annihilation;
        bool outLeg = role == PointRole::gauge || role == PointRole::creation;
        Mat D = rng.mat(ix.total * (outLeg ? g.d : 1), ix.total * (inLeg ? g.d : 1));
        Vec v1 = incrementMatrix(ix, role, D, x) * a;
        Vec v2 = singleCell(ix, role, D, x, a);
        CHECK((v1 - v2).norm() < 1e-12 * std::max(1.0, v1.norm()));
    }
}

TEST_CASE("product of scalar factorized kernels is factorized with product factors") {
    Grid g{1.0, 3, 1, 2};
    Rng rng(67);
    std::vector<PointMatrix> F = randomFactors(g, rng, 1.0);
    std::vector<PointMatrix> G = randomFactors(g, rng, 1.0);
    Mat XA = rng.mat(1, 1), XB = rng.mat(1, 1);
    Kernel S = expandFactorized({g, XA, F});
    Kernel T = expandFactorized({g, XB, G});
    Kernel P = kernelProduct(S, T);
    std::vector<PointMatrix> FG;
    for (int c = 0; c < g.n_cells; ++c) FG.push_back(pointProduct(F[c], G[c]));
    Kernel Q = expandFactorized({g, Mat(XA * XB), FG});
    CHECK(P.tab.size() == Q.tab.size());
    for (const auto& [k, blk] : Q.tab) {
        REQUIRE(P.find(k));
        CHECK((*P.find(k) - blk).norm() < 1e-12 * std::max(1.0, blk.norm()));
    }
}

TEST_CASE("scalar evolution acts in closed form on exponential vectors") {
    Grid g{1.0, 4, 1, 1};
    FockIndexer ix(g);
    Rng rng(71);
    std::vector<PointMatrix> F = randomFactors(g, rng, 0.8);
    cxd u0 = rng.scalar();
    Mat U0(1, 1);
    U0 << u0;
    Mat U = evolve(g, ix, F, U0, g.horizon);
    std::vector<cxd> kv, kpv;
    for (int c = 0; c < g.n_cells; ++c) {
        kv.push_back(rng.scalar());
        kpv.push_back(rng.scalar());
    }
    auto kf = [&](int c) { return Vec::Constant(1, kv[c]); };
    auto kpf = [&](int c) { return Vec::Constant(1, kpv[c]); };
    Vec one = Vec::Ones(1);
    FockVector ek = exponentialVector(g, one, kf);
    FockVector ekp = exponentialVector(g, one, kpf);
    cxd lhs = fockInner(g, ek, unpackFock(ix, U * packFock(ix, ekp)));
    cxd rhs = u0;
    for (int c = 0; c < g.n_cells; ++c) {
        cxd alpha = F[c].f00(0, 0) * kpv[c] + F[c].f0p(0, 0);
        cxd beta = 1.0 + g.dt() * (F[c].fm0(0, 0) * kpv[c] + F[c].fmp(0, 0));
        rhs *= beta + g.dt() * std::conj(kv[c]) * alpha;
    }
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)));
}

TEST_CASE("unitarity defect of the hp evolution converges at first order") {
    Rng rng(83);
    Mat W = rng.unitary(2), L = 0.6 * rng.mat(2, 2), H = rng.hermitian(2);
    Mat U0 = rng.unitary(2);
    std::vector<double> defect;
    for (int n : {2, 4, 8}) {
        Grid g{1.0, n, 2, 1};
        FockIndexer ix(g);
        std::vector<PointMatrix> F(n, hpParametrize(W, L, H));
        Mat U = evolve(g, ix, F, U0, g.horizon);
        defect.push_back(unitarityDefect(ix, U, 2.0, 1.0));
    }
    CHECK(std::log2(defect[0] / defect[1]) > 0.9);
    CHECK(std::log2(defect[1] / defect[2]) > 0.9);

    // matrix-free path reproduces the dense defect
    Grid g{1.0, 8, 2, 1};
    std::vector<PointMatrix> F(8, hpParametrize(W, L, H));
    LocalChainOp C = localChain(g, F, U0, g.horizon);
    Rng prng(5);
    double dc = unitarityDefectChain(C, 2.0, 1.0, prng);
    CHECK(dc == doctest::Approx(defect[2]).epsilon(1e-3));
}

TEST_CASE("ito formula residual vanishes at first order") {
    Rng rng(89);
    Mat W = rng.unitary(2), L = 0.6 * rng.mat(2, 2), H = rng.hermitian(2);
    Mat U0 = rng.unitary(2);
    std::vector<double> res;
    for (int n : {2, 4, 8}) {
        Grid g{1.0, n, 2, 1};
        FockIndexer ix(g);
        std::vector<PointMatrix> F(n, hpParametrize(W, L, H));
        res.push_back(itoFormulaCheck(g, ix, F, U0, 2.0, 1.0));
    }
    CHECK(std::log2(res[0] / res[1]) > 0.9);
    CHECK(std::log2(res[1] / res[2]) > 0.9);

    // the vector seminorm variant is dominated by the dense residual
    Grid g{1.0, 8, 2, 1};
    std::vector<PointMatrix> F(8, hpParametrize(W, L, H));
    Rng prng(7);
    double sc = itoFormulaDefectChain(g, F, U0, 2.0, 1.0, 5, prng);
    CHECK(sc <= res[2] * (1 + 1e-9));
    CHECK(sc > 0.1 * res[2]);
}
