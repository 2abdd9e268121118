#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "oracles.hpp"
#include "qsc/factorized.hpp"
#include "qsc/integrals.hpp"

using namespace qsc;

namespace {

long legPow(const Grid& g, int n) {
    long r = 1;
    for (int i = 0; i < n; ++i) r *= g.d;
    return r;
}

Integrand randomIntegrand(const Grid& g, const FockIndexer& ix, Rng& rng,
                          int ntables, bool withEmpty) {
    Integrand B{g, {}};
    if (withEmpty) B.add(ix, TableKey{}, 0.3 * rng.mat(ix.total, ix.total));
    for (int t = 0; t < ntables;) {
        TableKey k{};
        for (int c = 0; c < g.n_cells; ++c) {
            double u = rng.uniform();
            mask_t b = mask_t(1) << c;
            if (u < 0.35) continue;
            if (u < 0.55) k.k00 |= b;
            else if (u < 0.70) k.k0p |= b;
            else if (u < 0.85) k.km0 |= b;
            else k.kmp |= b;
        }
        if (!k.all()) continue;
        long rows = ix.total * legPow(g, popcount(k.k00 | k.k0p));
        long cols = ix.total * legPow(g, popcount(k.km0 | k.k00));
        B.add(ix, k, 0.3 * rng.mat(rows, cols));
        ++t;
    }
    return B;
}

const PointRole kRoles[4] = {PointRole::gauge, PointRole::creation,
                             PointRole::annihilation, PointRole::time_};

Vec reconstruct(const Integrand& B, const FockIndexer& ix, double t, const Vec& a) {
    Vec rec = Vec::Zero(ix.total);
    if (const Mat* e = B.find(TableKey{})) rec += (*e) * a;
    for (int x = 0; x < ix.g.n_cells; ++x) {
        if (!(ix.g.timeOf(x) < t - 1e-12)) continue;
        for (PointRole role : kRoles)
            rec += singleCell(ix, role, qsDerivative(B, ix, x, role), x, a);
    }
    return rec;
}

}  // namespace

TEST_CASE("single integrals of the derivatives rebuild the multiple integral") {
    for (auto [dim_h, d] : {std::pair{2, 2}, std::pair{1, 1}}) {
        Grid g{1.0, 3, dim_h, d};
        FockIndexer ix(g);
        Rng rng(91 + d);
        Integrand B = randomIntegrand(g, ix, rng, 10, true);
        for (double t : {g.horizon + 1.0, 0.67}) {
            Mat M = multipleMatrix(B, ix, t);
            Vec a = rng.vec(ix.total);
            CHECK((reconstruct(B, ix, t, a) - M * a).norm() <
                  1e-12 * std::max(1.0, M.norm()));
        }
    }
}

TEST_CASE("conjugate integrand is the adjoint under the chain measure") {
    Grid g{1.0, 3, 2, 2};
    FockIndexer ix(g);
    Rng rng(101);
    Integrand B = randomIntegrand(g, ix, rng, 8, true);
    Integrand Bs = conjugateIntegrand(B, ix);
    double t = g.horizon + 1;
    Mat M = multipleMatrix(B, ix, t), Ms = multipleMatrix(Bs, ix, t);
    Eigen::VectorXd w = oracle::chainWeights(ix);
    Mat adj = w.cwiseInverse().asDiagonal() * M.adjoint() * w.asDiagonal();
    CHECK((Ms - adj).norm() < 1e-12 * std::max(1.0, M.norm()));
    Integrand Bss = conjugateIntegrand(Bs, ix);
    for (const auto& [k, blk] : B.tab) {
        REQUIRE(Bss.find(k));
        CHECK((*Bss.find(k) - blk).norm() < 1e-12 * std::max(1.0, blk.norm()));
    }
}

TEST_CASE("integrand norm dominates the relative operator norm") {
    Grid g{1.0, 3, 2, 1};
    FockIndexer ix(g);
    Rng rng(113);
    for (int trial = 0; trial < 6; ++trial) {
        Integrand B = randomIntegrand(g, ix, rng, 6, trial % 2 == 0);
        EtaSix eta{1.0 + rng.uniform(), 1.0 + rng.uniform(), 1.0 + rng.uniform(),
                   0.5 + rng.uniform(), 0.5 + rng.uniform(), 0.5 + rng.uniform()};
        double xip = eta.up_m + eta.up_0 + eta.up_p;
        double xim = 1.0 / (1 / eta.lo_m + 1 / eta.lo_0 + 1 / eta.lo_p);
        double t = g.horizon + 1;
        double actual = relativeNorm(ix, multipleMatrix(B, ix, t), xip, xim);
        CHECK(actual <= integrandNorm(B, ix, t, eta) * (1 + 1e-9));
    }
}

static StepProcess adaptedSteps(const Grid& g, const FockIndexer& ix, Rng& rng) {
    std::vector<PointMatrix> F;
    long hd = g.dim_h * g.d;
    for (int c = 0; c < g.n_cells; ++c)
        F.push_back(hpParametrize(rng.unitary(hd), 0.5 * rng.mat(hd, g.dim_h),
                                  rng.hermitian(g.dim_h)));
    Mat U0 = rng.unitary(g.dim_h);
    StepProcess U;
    for (int c = 0; c < g.n_cells; ++c)
        U.push_back(epsilonMatrix(chronoKernel(g, F, U0, g.timeOf(c)), ix));
    return U;
}

TEST_CASE("ito sum against an adapted step equals the composed single integral") {
    Grid g{1.0, 3, 2, 1};
    FockIndexer ix(g);
    Rng rng(127);
    StepProcess U = adaptedSteps(g, ix, rng);
    double t = g.horizon + 1;
    Vec a = rng.vec(ix.total);
    for (PointRole role : kRoles) {
        bool inLeg = role == PointRole::gauge || role == PointRole::annihilation;
        bool outLeg = role == PointRole::gauge || role == PointRole::creation;
        PointFamily D, Dc;
        for (int c = 0; c < g.n_cells; ++c) {
            Mat Dx = rng.mat(ix.total * (outLeg ? g.d : 1),
                             ix.total * (inLeg ? g.d : 1));
            D.push_back(Dx);
            Dc.push_back(inLeg ? Mat(Dx * liftWithLeg(U[c], g.d)) : Mat(Dx * U[c]));
        }
        Vec lhs = itoSumIntegral(ix, role, D, U, t, a);
        Vec rhs = singleIntegral(ix, role, Dc, t, a);
        CHECK((lhs - rhs).norm() < 1e-11 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("adaptedness certificate") {
    Grid g{1.0, 4, 2, 1};
    FockIndexer ix(g);
    Rng rng(131);
    StepProcess U = adaptedSteps(g, ix, rng);
    CHECK(adaptednessTest(ix, U[2], g.timeOf(2)) < 1e-12);
    CHECK(adaptednessTest(ix, rng.mat(ix.total, ix.total), 0.5) > 1e-3);
}

TEST_CASE("creator and annihilator are mutually adjoint under the chain measure") {
    Grid g{1.0, 3, 2, 2};
    FockIndexer ix(g);
    Eigen::VectorXd w = oracle::chainWeights(ix);
    for (int e = 0; e < g.d; ++e) {
        Mat A = denseAnnihilator(ix, 1, e), C = denseCreator(ix, 1, e);
        Mat adj = w.cwiseInverse().asDiagonal() * A.adjoint() * w.asDiagonal();
        CHECK((adj - C / g.dt()).norm() < 1e-13);
    }
}
