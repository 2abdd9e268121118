#include "qsc/factorized.hpp"

namespace qsc {

namespace {

std::vector<int> catAsc(mask_t a, mask_t b) {
    std::vector<int> v = cellsOf(a), w = cellsOf(b);
    v.insert(v.end(), w.begin(), w.end());
    return v;
}

// apply a factor G of shape (h a)x(h b), a,b in {1,d}, to the h index of M,
// appending one row leg when a == d and one column leg when b == d
Mat applyFactor(const Mat& M, const Mat& G, int dim_h, int a, int b) {
    long drows = M.rows() / dim_h;
    Mat out = Mat::Zero(M.rows() * a, M.cols() * b);
    for (int h2 = 0; h2 < dim_h; ++h2)
        for (int eo = 0; eo < a; ++eo)
            for (int h1 = 0; h1 < dim_h; ++h1)
                for (int ei = 0; ei < b; ++ei) {
                    cxd gv = G(h2 * a + eo, h1 * b + ei);
                    if (gv == cxd(0, 0)) continue;
                    for (long rl = 0; rl < drows; ++rl)
                        for (long cf = 0; cf < M.cols(); ++cf)
                            out((h2 * drows + rl) * a + eo, cf * b + ei) +=
                                gv * M(h1 * drows + rl, cf);
                }
    return out;
}

}  // namespace

Kernel expandFactorized(const FactorizedKernel& fk, double t) {
    const Grid& g = fk.g;
    Kernel T{g, {}};
    mask_t past = g.cellsBefore(t);
    // roles per cell: 0 absent, 1 preserved, 2 created, 3 annihilated, 4 scalar
    std::vector<int> role(g.n_cells, 0);
    while (true) {
        bool ok = true;
        TableKey key;
        for (int c = 0; c < g.n_cells && ok; ++c) {
            mask_t bit = mask_t(1) << c;
            if (!(past & bit) && role[c] >= 2) ok = false;
            if (role[c] == 1) key.k00 |= bit;
            if (role[c] == 2) key.k0p |= bit;
            if (role[c] == 3) key.km0 |= bit;
            if (role[c] == 4) key.kmp |= bit;
        }
        if (ok) {
            Mat M = fk.X;
            std::vector<int> rowCells, colCells;
            for (int c = 0; c < g.n_cells; ++c) {
                mask_t bit = mask_t(1) << c;
                const PointMatrix& f = fk.f[c];
                bool future = !(past & bit);
                switch (role[c]) {
                    case 1:
                        M = applyFactor(M,
                                        future ? Mat(Mat::Identity(g.dim_h * g.d,
                                                                   g.dim_h * g.d))
                                               : f.f00,
                                        g.dim_h, g.d, g.d);
                        rowCells.push_back(c);
                        colCells.push_back(c);
                        break;
                    case 2:
                        M = applyFactor(M, f.f0p, g.dim_h, g.d, 1);
                        rowCells.push_back(c);
                        break;
                    case 3:
                        M = applyFactor(M, f.fm0, g.dim_h, 1, g.d);
                        colCells.push_back(c);
                        break;
                    case 4:
                        M = applyFactor(M, f.fmp, g.dim_h, 1, 1);
                        break;
                    default:
                        break;
                }
            }
            std::vector<long> rowmap =
                legRemap(g.dim_h, g.d, rowCells, catAsc(key.k00, key.k0p));
            std::vector<long> colmap =
                legRemap(g.dim_h, g.d, colCells, catAsc(key.km0, key.k00));
            Mat out(M.rows(), M.cols());
            for (long r = 0; r < out.rows(); ++r)
                for (long c = 0; c < out.cols(); ++c) out(r, c) = M(rowmap[r], colmap[c]);
            T.add(key, out);
        }
        int c = 0;
        for (; c < g.n_cells; ++c) {
            if (++role[c] < 5) break;
            role[c] = 0;
        }
        if (c == g.n_cells) break;
    }
    return T;
}

Kernel chronoKernel(const Grid& g, const std::vector<PointMatrix>& F, const Mat& U0,
                    double t) {
    return expandFactorized(FactorizedKernel{g, U0, F}, t);
}

FactorizedKernel secondQuantization(const Grid& g, const Mat& w) {
    PointMatrix p = zeroPoint(g.dim_h, g.d);
    for (int h = 0; h < g.dim_h; ++h)
        for (int a = 0; a < g.d; ++a)
            for (int b = 0; b < g.d; ++b) p.f00(h * g.d + a, h * g.d + b) = w(a, b);
    return {g, Mat::Identity(g.dim_h, g.dim_h), std::vector<PointMatrix>(g.n_cells, p)};
}

}  // namespace qsc
