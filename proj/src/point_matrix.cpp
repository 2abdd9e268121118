#include "qsc/point_matrix.hpp"

#include <Eigen/Eigenvalues>

namespace qsc {

PointMatrix identityPoint(int dim_h, int d) {
    return {Mat::Identity(dim_h * d, dim_h * d), Mat::Zero(dim_h * d, dim_h),
            Mat::Zero(dim_h, dim_h * d), Mat::Zero(dim_h, dim_h)};
}

PointMatrix zeroPoint(int dim_h, int d) {
    return {Mat::Zero(dim_h * d, dim_h * d), Mat::Zero(dim_h * d, dim_h),
            Mat::Zero(dim_h, dim_h * d), Mat::Zero(dim_h, dim_h)};
}

PointMatrix pointAdd(const PointMatrix& a, const PointMatrix& b) {
    return {a.f00 + b.f00, a.f0p + b.f0p, a.fm0 + b.fm0, a.fmp + b.fmp};
}

PointMatrix pointScale(cxd s, const PointMatrix& a) {
    return {s * a.f00, s * a.f0p, s * a.fm0, s * a.fmp};
}

PointMatrix pointProduct(const PointMatrix& a, const PointMatrix& b) {
    return {a.f00 * b.f00, a.f00 * b.f0p + a.f0p, a.fm0 * b.f00 + b.fm0,
            a.fm0 * b.f0p + a.fmp + b.fmp};
}

PointMatrix pseudoConjugate(const PointMatrix& f) {
    return {f.f00.adjoint(), f.fm0.adjoint(), f.f0p.adjoint(), f.fmp.adjoint()};
}

static double offIdentity(const PointMatrix& p) {
    double r = (p.f00 - Mat::Identity(p.f00.rows(), p.f00.cols())).norm();
    r = std::max(r, p.f0p.norm());
    r = std::max(r, p.fm0.norm());
    return std::max(r, p.fmp.norm());
}

double pseudoUnitaryCheck(const PointMatrix& f) {
    PointMatrix fs = pseudoConjugate(f);
    return std::max(offIdentity(pointProduct(fs, f)), offIdentity(pointProduct(f, fs)));
}

PointMatrix hpParametrize(const Mat& W, const Mat& L, const Mat& H) {
    return {W, L, -L.adjoint() * W, -0.5 * L.adjoint() * L - cxd(0, 1) * H};
}

double pseudoHermitianCheck(const PointMatrix& h) {
    double r = (h.f00 - h.f00.adjoint()).norm();
    r = std::max(r, (h.fm0 - h.f0p.adjoint()).norm());
    return std::max(r, (h.fmp - h.fmp.adjoint()).norm());
}

static cxd phiScalar(int order, cxd lam) {
    // phi1(l) = (e^{-il}-1)/l, phi2(l) = (e^{-il}-1+il)/l^2, series near 0
    if (std::abs(lam) < 1e-4) {
        cxd sum(0, 0);
        double fact = 1;
        for (int k = 1; k < 40; ++k) {
            fact *= k;
            if (k < order) continue;
            cxd p(1, 0);
            for (int j = 0; j < k; ++j) p *= cxd(0, -1);
            for (int j = 0; j < k - order; ++j) p *= lam;
            sum += p / fact;
        }
        return sum;
    }
    cxd e = std::exp(cxd(0, -1) * lam);
    if (order == 1) return (e - 1.0) / lam;
    return (e - 1.0 + cxd(0, 1) * lam) / (lam * lam);
}

static void expParts(const Mat& A, Mat& E, Mat& P1, Mat& P2) {
    long n = A.rows();
    if (A.norm() < 0.5) {
        E = Mat::Identity(n, n);
        P1 = Mat::Zero(n, n);
        P2 = Mat::Zero(n, n);
        Mat pk2 = Mat::Zero(n, n), pk1 = Mat::Identity(n, n), pk = A;
        double fact = 1;
        cxd ph(1, 0);
        for (int k = 1; k < 40; ++k) {
            fact *= k;
            ph *= cxd(0, -1);
            if (k >= 2) P2 += (ph / fact) * pk2;
            P1 += (ph / fact) * pk1;
            E += (ph / fact) * pk;
            pk2 = pk1;
            pk1 = pk;
            pk = pk * A;
        }
        return;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    if (es.info() == Eigen::Success &&
        (A - A.adjoint()).norm() < 1e-10 * std::max(1.0, A.norm())) {
        Mat V = es.eigenvectors();
        Vec lam = es.eigenvalues().cast<cxd>();
        Vec e(n), p1(n), p2(n);
        for (long i = 0; i < n; ++i) {
            e[i] = std::exp(cxd(0, -1) * lam[i]);
            p1[i] = phiScalar(1, lam[i]);
            p2[i] = phiScalar(2, lam[i]);
        }
        E = V * e.asDiagonal() * V.adjoint();
        P1 = V * p1.asDiagonal() * V.adjoint();
        P2 = V * p2.asDiagonal() * V.adjoint();
        return;
    }
    Eigen::ComplexEigenSolver<Mat> ces(A);
    Mat V = ces.eigenvectors();
    Vec lam = ces.eigenvalues();
    Vec e(n), p1(n), p2(n);
    for (long i = 0; i < n; ++i) {
        e[i] = std::exp(cxd(0, -1) * lam[i]);
        p1[i] = phiScalar(1, lam[i]);
        p2[i] = phiScalar(2, lam[i]);
    }
    Mat Vi = V.inverse();
    E = V * e.asDiagonal() * Vi;
    P1 = V * p1.asDiagonal() * Vi;
    P2 = V * p2.asDiagonal() * Vi;
}

PointMatrix hamiltonianExp(const PointMatrix& h) {
    Mat E, P1, P2;
    expParts(h.f00, E, P1, P2);
    return {E, P1 * h.f0p, h.fm0 * P1, h.fm0 * P2 * h.f0p - cxd(0, 1) * h.fmp};
}

CanonicalParts canonicalDecompose(const PointMatrix& h) {
    long hd = h.f00.rows(), hh = h.fmp.rows();
    Eigen::SelfAdjointEigenSolver<Mat> es(h.f00);
    Mat V = es.eigenvectors();
    Eigen::VectorXd lam = es.eigenvalues();
    double tol = 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    Mat pinv = Mat::Zero(hd, hd), proj = Mat::Zero(hd, hd);
    for (long i = 0; i < hd; ++i)
        if (std::abs(lam[i]) > tol) {
            pinv += (1.0 / lam[i]) * V.col(i) * V.col(i).adjoint();
            proj += V.col(i) * V.col(i).adjoint();
        }
    CanonicalParts out;
    out.F = pinv * h.f0p;
    out.E = cxd(0, 1) * (Mat::Identity(hd, hd) - proj) * h.f0p;
    Mat L00 = hamiltonianExp(h).f00 - Mat::Identity(hd, hd);
    out.poisson = {L00, L00 * out.F, out.F.adjoint() * L00,
                   out.F.adjoint() * L00 * out.F};
    out.brownian = {Mat::Zero(hd, hd), -out.E, out.E.adjoint(),
                    -0.5 * out.E.adjoint() * out.E};
    Mat H = h.fmp - out.F.adjoint() * h.f00 * out.F;
    out.deterministic = {Mat::Zero(hd, hd), Mat::Zero(hd, hh), Mat::Zero(hh, hd),
                         cxd(0, -1) * H};
    return out;
}

}  // namespace qsc
