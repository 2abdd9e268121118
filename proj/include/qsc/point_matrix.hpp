#pragma once
#include "qsc/fock.hpp"

namespace qsc {

// one-cell triangular block matrix with unit corners:
//   [ I  fm0  fmp ]
//   [ 0  f00  f0p ]        rows (-,0,+), cols (-,0,+)
//   [ 0   0    I  ]
// shapes: f00 (h d)x(h d), f0p (h d)x(h), fm0 (h)x(h d), fmp (h)x(h)
struct PointMatrix {
    Mat f00, f0p, fm0, fmp;
};

PointMatrix identityPoint(int dim_h, int d);
PointMatrix zeroPoint(int dim_h, int d);

PointMatrix pointAdd(const PointMatrix& a, const PointMatrix& b);
PointMatrix pointScale(cxd s, const PointMatrix& a);

// triangular product with unit corners
PointMatrix pointProduct(const PointMatrix& a, const PointMatrix& b);

// pseudo-adjoint: transpose about the antidiagonal with blockwise adjoints
PointMatrix pseudoConjugate(const PointMatrix& f);

// max block residual of F*F - I and FF* - I
double pseudoUnitaryCheck(const PointMatrix& f);

// F00 = W, F0p = L, Fm0 = -L^dag W, Fmp = -L^dag L / 2 - iH
PointMatrix hpParametrize(const Mat& W, const Mat& L, const Mat& H);

// max residual of H00 = H00^dag, Hm0 = H0p^dag, Hmp = Hmp^dag
double pseudoHermitianCheck(const PointMatrix& h);

// F00 = exp(-iH00), F0p = phi1(H00) H0p, Fm0 = Hm0 phi1(H00),
// Fmp = Hm0 phi2(H00) H0p - i Hmp, with
// phi1(A) = sum_{k>=1} (-i)^k A^{k-1}/k!,  phi2(A) = sum_{k>=2} (-i)^k A^{k-2}/k!
PointMatrix hamiltonianExp(const PointMatrix& h);

struct CanonicalParts {
    PointMatrix poisson, brownian, deterministic;  // increments, zero corners
    Mat E, F;  // H0p = H00 F - iE, Hm0 = F* H00 + iE*, F* E = 0
};

// splits hamiltonianExp(h) - I into Poissonian, Brownian and deterministic
// increments; requires Hermitian H00 (possibly singular)
CanonicalParts canonicalDecompose(const PointMatrix& h);

}  // namespace qsc
