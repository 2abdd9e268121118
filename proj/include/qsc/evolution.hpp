#pragma once
#include "qsc/chain_op.hpp"
#include "qsc/factorized.hpp"
#include "qsc/integrals.hpp"

namespace qsc {

// U0 on the initial space, identity on the legs of every sector
Mat liftInitial(const FockIndexer& ix, const Mat& U0);

// one-cell block acting on the initial space and an optional point leg on
// either side, lifted to the full space with identity on spectator legs
Mat liftPointBlock(const FockIndexer& ix, const Mat& blk, bool rowLeg, bool colLeg);

// extraction of the x-leg as a dense (N d) x N matrix; its transpose reattaches
Mat extractLeg(const FockIndexer& ix, int x);

// projector onto sectors not containing x
Mat outsideProjector(const FockIndexer& ix, int x);

// dense one-cell integral increment of the family value D at cell x
Mat incrementMatrix(const FockIndexer& ix, PointRole role, const Mat& D, int x);

// chain-measure adjoint W^-1 M^H W
Mat measureAdjoint(const FockIndexer& ix, const Mat& M);

// dense chronological evolution with per-cell factors F and initial U0
Mat evolve(const Grid& g, const FockIndexer& ix, const std::vector<PointMatrix>& F,
           const Mat& U0, double t);

// independent stepper: U <- U + sum of one-cell increments of (F - 1)
// composed after the running step value
Mat eulerEvolve(const Grid& g, const FockIndexer& ix,
                const std::vector<PointMatrix>& F, const Mat& U0, double t);

// relative (xi_plus -> xi_minus) norm of W^-1 U^H W U - I with chain-measure
// weights; xi_plus > xi_minus suppresses high sectors, where the one-cell
// corrections accumulate without decay
double unitarityDefect(const FockIndexer& ix, const Mat& U, double xi_plus,
                       double xi_minus);

// same defect for the matrix-free d == 1 chain evolution, by power iteration
double unitarityDefectChain(const LocalChainOp& U, double xi_plus, double xi_minus,
                            Rng& rng, int iters = 120);

// one-cell increment of a pointwise generator for d == 1, matrix free
Vec chainIncrementApply(const Grid& g, const PointMatrix& B, int x, const Vec& v);

// max over cells x of the relative (xi_plus -> xi_minus) norm of
// Delta(U*U)(x) - U* Inc(F*F - 1)(x) U, dense
double itoFormulaCheck(const Grid& g, const FockIndexer& ix,
                       const std::vector<PointMatrix>& F, const Mat& U0,
                       double xi_plus, double xi_minus);

// the same residual for d == 1 as a max of the weighted ||(LHS - RHS) v|| over
// seeded unit vectors, usable when the dense operator does not fit
double itoFormulaDefectChain(const Grid& g, const std::vector<PointMatrix>& F,
                             const Mat& U0, double xi_plus, double xi_minus,
                             int nvec, Rng& rng);

}  // namespace qsc
