#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"
#include "qsc/pseudo_fock.hpp"

using namespace qsc;

namespace {

FockVector randomFock(const Grid& g, Rng& rng) {
    FockVector a = zeroFock(g);
    for (mask_t S = 0; S <= g.full(); ++S) a[S] = rng.vec(g.sectorDim(S));
    return a;
}

TripleChainVector randomTriple(const Grid& g, Rng& rng) {
    TripleChainVector c{g, {}};
    for (mask_t m = 0; m <= g.full(); ++m) {
        mask_t f1 = g.full() & ~m;
        for (mask_t z = f1;; z = (z - 1) & f1) {
            mask_t f2 = f1 & ~z;
            for (mask_t p = f2;; p = (p - 1) & f2) {
                c.add(TripleKey{m, z, p}, rng.vec(g.sectorDim(z)));
                if (p == 0) break;
            }
            if (z == 0) break;
        }
    }
    return c;
}

}  // namespace

TEST_CASE("the embedding is a pseudo-isometry with exact left inverse") {
    Grid g{1.0, 3, 2, 2};
    Rng rng(171);
    FockVector a = randomFock(g, rng), b = randomFock(g, rng);
    TripleChainVector Ja = embedJ(g, a), Jb = embedJ(g, b);
    cxd lhs = pseudoInner(g, Ja, Jb);
    cxd rhs = fockInner(g, a, b);
    CHECK(std::abs(lhs - rhs) < 1e-13 * std::max(1.0, std::abs(rhs)));
    FockVector back = adjointJ(g, Ja);
    for (mask_t S = 0; S <= g.full(); ++S)
        CHECK((back[S] - a[S]).norm() < 1e-13);
}

TEST_CASE("fiberwise kernel action reproduces epsilon through the embedding") {
    Grid g{1.0, 3, 2, 2};
    Rng rng(179);
    FockIndexer ix(g);
    for (int trial = 0; trial < 5; ++trial) {
        Kernel T = oracle::randomKernel(g, rng, 15);
        FockVector a = randomFock(g, rng);
        CHECK(spatialEpsilonCheck(T, a) < 1e-12);
    }
}

TEST_CASE("J J* is idempotent and pseudo-symmetric") {
    Grid g{1.0, 3, 2, 1};
    Rng rng(181);
    TripleChainVector c = randomTriple(g, rng), c2 = randomTriple(g, rng);
    TripleChainVector p = embedJ(g, adjointJ(g, c));
    TripleChainVector pp = embedJ(g, adjointJ(g, p));
    cxd n1 = pseudoInner(g, p, c2), n2 = pseudoInner(g, c, embedJ(g, adjointJ(g, c2)));
    CHECK(std::abs(n1 - n2) < 1e-13 * std::max(1.0, std::abs(n1)));
    for (const auto& [k, v] : p.comp) {
        const Vec* w = pp.find(k);
        REQUIRE(w);
        CHECK((*w - v).norm() < 1e-13);
    }
}

TEST_CASE("fiberwise composition matches the kernel product exactly") {
    Grid g{1.0, 3, 2, 2};
    Rng rng(191);
    Kernel T = oracle::randomKernel(g, rng, 10);
    Kernel Ts = involution(T);
    FockVector a = randomFock(g, rng);
    FockVector lhs =
        adjointJ(g, decomposableApply(Ts, decomposableApply(T, embedJ(g, a))));
    FockVector rhs = epsilonApply(kernelProduct(Ts, T), a);
    for (mask_t S = 0; S <= g.full(); ++S)
        CHECK((lhs[S] - rhs[S]).norm() < 1e-12 * std::max(1.0, rhs[S].norm()));
}

TEST_CASE("the pseudo-projection insertion defect vanishes at first order") {
    std::vector<double> defect;
    for (int n : {2, 4, 8}) {
        Grid g{1.0, n, 1, 1};
        Kernel L{g, {}};
        for (int c = 0; c < n; ++c) {
            Mat b(1, 1);
            mask_t bit = mask_t(1) << c;
            b << cxd(0.4, 0.1);
            L.add({bit, 0, 0, 0}, b);
            b << cxd(0.3, -0.2);
            L.add({0, bit, 0, 0}, b);
            b << cxd(-0.2, 0.3);
            L.add({0, 0, bit, 0}, b);
            b << cxd(0.1, 0.2);
            L.add({0, 0, 0, bit}, b);
        }
        Kernel T = wickFromIntegrand(L, g.horizon + 1);
        Vec one = Vec::Ones(1);
        FockVector a =
            exponentialVector(g, one, [](int) { return Vec::Constant(1, cxd(0.5, 0.2)); });
        defect.push_back(projectionDefect(T, a, 1.0));
    }
    CHECK(defect[0] > defect[1]);
    CHECK(std::log2(defect[1] / defect[2]) > 0.9);
}
