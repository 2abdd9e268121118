#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "qsc/fock.hpp"

using namespace qsc;

TEST_CASE("chain integral of 2^|S|") {
    Grid g{0.75, 3, 1, 1};
    cxd v = chainIntegral(g, [](mask_t S) { return cxd(1 << popcount(S), 0); });
    // per cell 1 + 2 dt = 1.5
    CHECK(std::abs(v - cxd(3.375, 0)) < 1e-14);
}

TEST_CASE("xiNorm matches direct sum") {
    Grid g{1.0, 4, 2, 2};
    Rng rng(11);
    FockVector a = zeroFock(g);
    for (mask_t S = 0; S < a.size(); ++S) a[S] = rng.vec(g.sectorDim(S));
    double xi = 1.3;
    double direct = 0;
    for (mask_t S = 0; S < a.size(); ++S)
        direct += std::pow(xi * g.dt(), popcount(S)) * a[S].squaredNorm();
    CHECK(xiNorm(g, a, xi) == doctest::Approx(std::sqrt(direct)).epsilon(1e-13));
}

TEST_CASE("exponential vector inner product") {
    Grid g{1.0, 3, 1, 2};
    Rng rng(5);
    std::vector<Vec> k1, k2;
    for (int c = 0; c < 3; ++c) {
        k1.push_back(rng.vec(2));
        k2.push_back(rng.vec(2));
    }
    Vec h0(1);
    h0 << 1.0;
    FockVector e1 = exponentialVector(g, h0, [&](int c) { return k1[c]; });
    FockVector e2 = exponentialVector(g, h0, [&](int c) { return k2[c]; });
    cxd expect = 1.0;
    for (int c = 0; c < 3; ++c) expect *= 1.0 + g.dt() * k1[c].dot(k2[c]);
    CHECK(std::abs(fockInner(g, e1, e2) - expect) < 1e-13);
}

static double iteratedDerivNormSq(const Grid& g, const FockVector& a, mask_t R,
                                  double xi) {
    // sum over all leg values of || d...d a (R) ||(xi)^2
    std::vector<FockVector> layer{a};
    for (int c : cellsOf(R)) {
        std::vector<FockVector> next;
        for (const FockVector& v : layer) {
            auto comps = pointDerivative(g, v, c);
            for (auto& w : comps) next.push_back(std::move(w));
        }
        layer = std::move(next);
    }
    double s = 0;
    for (const FockVector& v : layer) {
        double n = xiNorm(g, v, xi);
        s += n * n;
    }
    return s;
}

TEST_CASE("multiple derivative isometry") {
    Grid g{1.0, 4, 2, 2};
    Rng rng(21);
    FockVector a = zeroFock(g);
    for (mask_t S = 0; S < a.size(); ++S) a[S] = rng.vec(g.sectorDim(S));
    double xi = 0.8, eta = 0.5;
    double lhs = 0;
    for (mask_t R = 0; R <= g.full(); ++R)
        lhs += std::pow(eta * g.dt(), popcount(R)) * iteratedDerivNormSq(g, a, R, xi);
    double rhs = xiNorm(g, a, xi + eta);
    CHECK(std::sqrt(lhs) == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("pack/unpack roundtrip and leg remap") {
    Grid g{1.0, 3, 2, 2};
    FockIndexer ix(g);
    Rng rng(3);
    FockVector a = zeroFock(g);
    for (mask_t S = 0; S < a.size(); ++S) a[S] = rng.vec(g.sectorDim(S));
    FockVector b = unpackFock(ix, packFock(ix, a));
    for (mask_t S = 0; S < a.size(); ++S) CHECK((a[S] - b[S]).norm() == 0.0);

    std::vector<int> src{2, 0, 1}, dst{0, 1, 2};
    auto r = legRemap(2, 2, src, dst);
    auto back = legRemap(2, 2, dst, src);
    for (long i = 0; i < long(r.size()); ++i) CHECK(back[r[i]] == i);
}

TEST_CASE("grid cap validation") {
    Grid ok{1.0, 10, 4, 1};
    ok.validate();
    Grid bad{1.0, 22, 2, 1};
    CHECK_THROWS(bad.validate());
}
