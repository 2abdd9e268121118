#pragma once
#include "qsc/evolution.hpp"

namespace qsc {

// one-cell structure maps in column-major vec form: slot s_mu_nu sends vec(A)
// (A is dim_h x dim_h) to the vectorized block of the matching point-matrix
// shape (s00 to (hd)x(hd), s0p to (hd)x(h), sm0 to (h)x(hd), smp to (h)x(h))
struct StructureMap {
    Mat s00, s0p, sm0, smp;
};

// maps of the inner flow driven by the factor F:
//   phi00(A) = F00* (A x 1) F00              - (A x 1)
//   phi0p(A) = F00* (A x 1) F0p + Fm0* A
//   phim0(A) = F0p* (A x 1) F00 + A Fm0
//   phimp(A) = F0p* (A x 1) F0p + A Fmp + Fmp* A
StructureMap spatialStructureMap(const Grid& g, const PointMatrix& F);

// max over slots of ||lambda(I)||; vanishes for pseudo-unitary factors
double structureMapUnitDefect(const Grid& g, const StructureMap& S);

// table family of the flow of A over [0, t): chronological composition of the
// per-cell structure maps, latest cell innermost, applied to A
Kernel flowKernel(const Grid& g, const std::vector<StructureMap>& S, const Mat& A,
                  double t);

// dense flow action: epsilon of the Wick dressing of the flow tables
Mat flowApply(const Grid& g, const FockIndexer& ix,
              const std::vector<StructureMap>& S, const Mat& A, double t);

// exponential bound on the relative (xi+ -> xi-) norm of the flow of A, using
// the induced-map bounds sqrt(dim_h) ||s||_2 per cell and role; d == 1 only
OperatorBound flowEstimate(const Grid& g, const std::vector<StructureMap>& S,
                           double normA, double xi_plus, double xi_minus);

}  // namespace qsc
