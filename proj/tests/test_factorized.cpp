#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"
#include "qsc/chain_op.hpp"
#include "qsc/factorized.hpp"

using namespace qsc;

static std::vector<PointMatrix> randomPoints(const Grid& g, Rng& rng) {
    std::vector<PointMatrix> f;
    for (int c = 0; c < g.n_cells; ++c)
        f.push_back({rng.mat(g.dim_h * g.d, g.dim_h * g.d),
                     rng.mat(g.dim_h * g.d, g.dim_h),
                     rng.mat(g.dim_h, g.dim_h * g.d), rng.mat(g.dim_h, g.dim_h)});
    return f;
}

TEST_CASE("second quantization acts diagonally and maps exponentials") {
    Grid g{1.0, 3, 1, 1};
    Mat w(1, 1);
    w << cxd(0.6, 0.3);
    Kernel T = expandFactorized(secondQuantization(g, w));
    FockIndexer ix(g);
    Mat M = epsilonMatrix(T, ix);
    for (mask_t S = 0; S <= g.full(); ++S) {
        cxd expect = std::pow(w(0, 0), popcount(S));
        CHECK(std::abs(M(ix.offset[S], ix.offset[S]) - expect) < 1e-13);
    }
    CHECK((M - Mat(M.diagonal().asDiagonal())).norm() < 1e-13);

    Grid g2{1.0, 3, 1, 2};
    Rng rng(17);
    Mat w2 = rng.mat(2, 2);
    std::vector<Vec> k;
    for (int c = 0; c < 3; ++c) k.push_back(rng.vec(2));
    Vec h0(1);
    h0 << 1.0;
    FockVector ek = exponentialVector(g2, h0, [&](int c) { return k[c]; });
    FockVector lhs = epsilonApply(expandFactorized(secondQuantization(g2, w2)), ek);
    FockVector rhs = exponentialVector(g2, h0, [&](int c) { return Vec(w2 * k[c]); });
    for (mask_t S = 0; S < lhs.size(); ++S) CHECK((lhs[S] - rhs[S]).norm() < 1e-13);
}

TEST_CASE("expansion is the chronological product, latest factor leftmost") {
    Grid g{1.0, 2, 2, 1};
    Rng rng(29);
    auto f = randomPoints(g, rng);
    Mat X = rng.mat(2, 2);
    Kernel T = expandFactorized(FactorizedKernel{g, X, f});
    const Mat* b = T.find({0, 3, 0, 0});
    REQUIRE(b);
    CHECK((*b - f[1].f0p * f[0].f0p * X).norm() < 1e-13);
    const Mat* s = T.find({0, 0, 0, 3});
    REQUIRE(s);
    CHECK((*s - f[1].fmp * f[0].fmp * X).norm() < 1e-13);
    const Mat* m = T.find({1, 0, 2, 0});
    REQUIRE(m);
    CHECK((*m - f[1].fm0 * f[0].f00 * X).norm() < 1e-13);
}

TEST_CASE("dense evolution equals the local chain product") {
    Grid g{1.0, 4, 2, 1};
    Rng rng(37);
    auto F = randomPoints(g, rng);
    Mat U0 = rng.mat(2, 2);
    FockIndexer ix(g);
    for (double t : {0.5, 1.1}) {
        Mat U = epsilonMatrix(chronoKernel(g, F, U0, t), ix);
        LocalChainOp chain = localChain(g, F, U0, t);
        Mat C(ix.total, ix.total);
        for (long i = 0; i < ix.total; ++i) {
            Vec e = Vec::Zero(ix.total);
            e[i] = 1;
            C.col(i) = chain.apply(e);
        }
        CHECK((U - C).norm() < 1e-12 * std::max(1.0, U.norm()));
        // adjoint apply consistency
        Vec v = rng.vec(ix.total), u = rng.vec(ix.total);
        cxd a = u.dot(chain.apply(v)), b = chain.applyAdjoint(u).dot(v);
        CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
    }
}

TEST_CASE("power iteration recovers the spectral norm") {
    Grid g{1.0, 4, 2, 1};
    Rng rng(43);
    auto F = randomPoints(g, rng);
    LocalChainOp chain = localChain(g, F, Mat::Identity(2, 2), 2.0);
    FockIndexer ix(g);
    Mat C(ix.total, ix.total);
    for (long i = 0; i < ix.total; ++i) {
        Vec e = Vec::Zero(ix.total);
        e[i] = 1;
        C.col(i) = chain.apply(e);
    }
    Rng prng(44);
    double pn = powerNorm([&](const Vec& v) { return chain.apply(v); },
                          [&](const Vec& v) { return chain.applyAdjoint(v); },
                          ix.total, prng);
    CHECK(pn == doctest::Approx(spectralNorm(C)).epsilon(1e-8));
}
