#include "qsc/flows.hpp"

namespace qsc {

namespace {

std::vector<int> catAsc(mask_t a, mask_t b) {
    std::vector<int> v = cellsOf(a), w = cellsOf(b);
    v.insert(v.end(), w.begin(), w.end());
    return v;
}

Vec vecOf(const Mat& M) {
    return Eigen::Map<const Vec>(M.data(), M.size());
}

// apply a vec-form superoperator slot to the dim_h blocks of M, spectator legs
// untouched; the new legs sit right after h on both sides
Mat applyLifted(const Mat& s, int h, int R, int C, const Mat& M) {
    long ra = M.rows() / h, ca = M.cols() / h;
    Mat out = Mat::Zero(R * ra, C * ca);
    Vec bv(h * h);
    for (long er = 0; er < ra; ++er)
        for (long ec = 0; ec < ca; ++ec) {
            for (int hc = 0; hc < h; ++hc)
                for (int hr = 0; hr < h; ++hr)
                    bv[hc * h + hr] = M(hr * ra + er, hc * ca + ec);
            Vec ov = s * bv;
            for (int c = 0; c < C; ++c)
                for (int r = 0; r < R; ++r)
                    out(r * ra + er, c * ca + ec) = ov[c * R + r];
        }
    return out;
}

}  // namespace

StructureMap spatialStructureMap(const Grid& g, const PointMatrix& F) {
    int h = g.dim_h;
    long hd = h * g.d;
    StructureMap S{Mat(hd * hd, h * h), Mat(hd * h, h * h), Mat(h * hd, h * h),
                   Mat(h * h, h * h)};
    for (int c = 0; c < h; ++c)
        for (int r = 0; r < h; ++r) {
            Mat A = Mat::Zero(h, h);
            A(r, c) = 1.0;
            Mat AI = liftWithLeg(A, g.d);
            S.s00.col(c * h + r) = vecOf(F.f00.adjoint() * AI * F.f00 - AI);
            S.s0p.col(c * h + r) =
                vecOf(F.f00.adjoint() * AI * F.f0p + F.fm0.adjoint() * A);
            S.sm0.col(c * h + r) =
                vecOf(F.f0p.adjoint() * AI * F.f00 + A * F.fm0);
            S.smp.col(c * h + r) = vecOf(F.f0p.adjoint() * AI * F.f0p +
                                         A * F.fmp + F.fmp.adjoint() * A);
        }
    return S;
}

double structureMapUnitDefect(const Grid& g, const StructureMap& S) {
    Vec vi = vecOf(Mat::Identity(g.dim_h, g.dim_h));
    return std::max({(S.s00 * vi).norm(), (S.s0p * vi).norm(),
                     (S.sm0 * vi).norm(), (S.smp * vi).norm()});
}

Kernel flowKernel(const Grid& g, const std::vector<StructureMap>& S, const Mat& A,
                  double t) {
    int h = g.dim_h;
    long hd = h * g.d;
    std::vector<int> cells = cellsOf(g.cellsBefore(t));
    int nc = int(cells.size());
    Kernel L{g, {}};
    std::vector<int> role(nc, 0);
    for (;;) {
        TableKey k{};
        Mat M = A;
        std::vector<int> rowCells, colCells;
        for (int i = nc - 1; i >= 0; --i) {
            int x = cells[i];
            mask_t bit = mask_t(1) << x;
            switch (role[i]) {
                case 0:
                    break;
                case 1:
                    k.k00 |= bit;
                    M = applyLifted(S[x].s00, h, hd, hd, M);
                    rowCells.insert(rowCells.begin(), x);
                    colCells.insert(colCells.begin(), x);
                    break;
                case 2:
                    k.k0p |= bit;
                    M = applyLifted(S[x].s0p, h, hd, h, M);
                    rowCells.insert(rowCells.begin(), x);
                    break;
                case 3:
                    k.km0 |= bit;
                    M = applyLifted(S[x].sm0, h, h, hd, M);
                    colCells.insert(colCells.begin(), x);
                    break;
                default:
                    k.kmp |= bit;
                    M = applyLifted(S[x].smp, h, h, h, M);
                    break;
            }
        }
        // legs are ascending on both sides; permute into canonical group order
        std::vector<long> rowmap =
            legRemap(h, g.d, rowCells, catAsc(k.k00, k.k0p));
        std::vector<long> colmap =
            legRemap(h, g.d, colCells, catAsc(k.km0, k.k00));
        Mat out(M.rows(), M.cols());
        for (long r = 0; r < out.rows(); ++r)
            for (long c = 0; c < out.cols(); ++c)
                out(r, c) = M(rowmap[r], colmap[c]);
        if (k.all() == 0 || out.norm() > 0) L.add(k, out);
        int i = 0;
        while (i < nc && role[i] == 4) role[i++] = 0;
        if (i == nc) break;
        ++role[i];
    }
    return L;
}

Mat flowApply(const Grid& g, const FockIndexer& ix,
              const std::vector<StructureMap>& S, const Mat& A, double t) {
    return epsilonMatrix(wickFromIntegrand(flowKernel(g, S, A, t), t), ix);
}

OperatorBound flowEstimate(const Grid& g, const std::vector<StructureMap>& S,
                           double normA, double xi_plus, double xi_minus) {
    if (g.d != 1) throw std::logic_error("flowEstimate needs d == 1");
    double rt = std::sqrt(double(g.dim_h));
    Zeta z;
    for (int c = 0; c < g.n_cells; ++c) {
        z.z00.push_back(1.0 + rt * spectralNorm(S[c].s00));
        z.z0p.push_back(rt * spectralNorm(S[c].s0p));
        z.zm0.push_back(rt * spectralNorm(S[c].sm0));
        z.zmp.push_back(rt * spectralNorm(S[c].smp));
    }
    return zetaExponentBound(g, z, normA, xi_plus, xi_minus);
}

}  // namespace qsc
