#include "qsc/fock.hpp"

namespace qsc {

bool& parallelFlag() {
    static bool on = true;
    return on;
}

std::vector<int> cellsOf(mask_t m) {
    std::vector<int> out;
    while (m) {
        int c = __builtin_ctz(m);
        out.push_back(c);
        m &= m - 1;
    }
    return out;
}

void Grid::validate() const {
    if (n_cells < 1 || n_cells > 22) throw std::invalid_argument("n_cells out of range");
    if (dim_h < 1 || d < 1) throw std::invalid_argument("dim_h and d must be positive");
    if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
    double total = dim_h;
    for (int i = 0; i < n_cells; ++i) total *= (1.0 + d);
    if (total > double(1 << 22)) throw std::invalid_argument("state space exceeds 2^22 cap");
}

FockVector zeroFock(const Grid& g) {
    FockVector a(mask_t(1) << g.n_cells);
    for (mask_t S = 0; S < a.size(); ++S) a[S] = Vec::Zero(g.sectorDim(S));
    return a;
}

FockVector basisFock(const Grid& g, mask_t S, long idx) {
    FockVector a = zeroFock(g);
    a[S][idx] = 1.0;
    return a;
}

cxd chainIntegral(const Grid& g, const std::function<cxd(mask_t)>& f) {
    Kahan re, im;
    mask_t n = mask_t(1) << g.n_cells;
    for (mask_t S = 0; S < n; ++S) {
        cxd v = f(S) * std::pow(g.dt(), popcount(S));
        re.add(v.real());
        im.add(v.imag());
    }
    return cxd(double(re.s), double(im.s));
}

double xiNorm(const Grid& g, const FockVector& a, double xi) {
    Kahan acc;
    for (mask_t S = 0; S < a.size(); ++S)
        acc.add(std::pow(xi * g.dt(), popcount(S)) * a[S].squaredNorm());
    return std::sqrt(double(acc.s));
}

cxd fockInner(const Grid& g, const FockVector& a, const FockVector& b, double xi) {
    Kahan re, im;
    for (mask_t S = 0; S < a.size(); ++S) {
        cxd v = std::pow(xi * g.dt(), popcount(S)) * a[S].dot(b[S]);
        re.add(v.real());
        im.add(v.imag());
    }
    return cxd(double(re.s), double(im.s));
}

FockVector exponentialVector(const Grid& g, const Vec& h0,
                             const std::function<Vec(int)>& k) {
    FockVector a = zeroFock(g);
    for (mask_t S = 0; S < a.size(); ++S) {
        std::vector<int> cells = cellsOf(S);
        long dim = g.sectorDim(S);
        for (long i = 0; i < dim; ++i) {
            long rest = i;
            cxd v = 1.0;
            for (int j = int(cells.size()) - 1; j >= 0; --j) {
                v *= k(cells[j])[rest % g.d];
                rest /= g.d;
            }
            a[S][i] = h0[rest] * v;
        }
    }
    return a;
}

std::vector<FockVector> pointDerivative(const Grid& g, const FockVector& a, int x) {
    std::vector<FockVector> out(g.d, zeroFock(g));
    mask_t bit = mask_t(1) << x;
    for (mask_t S = 0; S < a.size(); ++S) {
        if (S & bit) continue;
        mask_t Sx = S | bit;
        int r = rankIn(Sx, x);
        int nlegs = popcount(Sx);
        long below = 1;  // stride product of legs after position r (faster-running)
        for (int j = r + 1; j < nlegs; ++j) below *= g.d;
        long dim = g.sectorDim(S);
        for (long i = 0; i < dim; ++i) {
            long hi = i / below, lo = i % below;
            for (int e = 0; e < g.d; ++e)
                out[e][S][i] = a[Sx][(hi * g.d + e) * below + lo];
        }
    }
    return out;
}

FockIndexer::FockIndexer(const Grid& gr) : g(gr) {
    mask_t n = mask_t(1) << g.n_cells;
    offset.resize(n);
    for (mask_t S = 0; S < n; ++S) {
        offset[S] = total;
        total += g.sectorDim(S);
    }
}

Vec packFock(const FockIndexer& ix, const FockVector& a) {
    Vec v(ix.total);
    for (mask_t S = 0; S < a.size(); ++S) v.segment(ix.offset[S], a[S].size()) = a[S];
    return v;
}

FockVector unpackFock(const FockIndexer& ix, const Vec& v) {
    FockVector a(mask_t(1) << ix.g.n_cells);
    for (mask_t S = 0; S < a.size(); ++S)
        a[S] = v.segment(ix.offset[S], ix.g.sectorDim(S));
    return a;
}

Mat denseOperator(const FockIndexer& ix,
                  const std::function<FockVector(const FockVector&)>& op) {
    Mat M(ix.total, ix.total);
    for (mask_t S = 0; S < (mask_t(1) << ix.g.n_cells); ++S)
        for (long i = 0; i < ix.g.sectorDim(S); ++i)
            M.col(ix.index(S, i)) = packFock(ix, op(basisFock(ix.g, S, i)));
    return M;
}

std::vector<long> legRemap(int dim_h, int d, const std::vector<int>& srcCells,
                           const std::vector<int>& destCells) {
    int k = int(srcCells.size());
    std::vector<int> pos(k);  // pos[j] = index in srcCells of destCells[j]
    for (int j = 0; j < k; ++j) {
        pos[j] = -1;
        for (int p = 0; p < k; ++p)
            if (srcCells[p] == destCells[j]) pos[j] = p;
        if (pos[j] < 0) throw std::logic_error("legRemap: cell sets differ");
    }
    long dim = dim_h;
    for (int j = 0; j < k; ++j) dim *= d;
    std::vector<long> r(dim);
    std::vector<int> e(k);
    for (long i = 0; i < dim; ++i) {
        long rest = i;
        for (int j = k - 1; j >= 0; --j) {
            e[pos[j]] = int(rest % d);
            rest /= d;
        }
        long s = rest;  // h index
        for (int p = 0; p < k; ++p) s = s * d + e[p];
        r[i] = s;
    }
    return r;
}

double relativeNorm(const FockIndexer& ix, const Mat& M, double xi_plus, double xi_minus) {
    Vec wm(ix.total), wpInv(ix.total);
    for (mask_t S = 0; S < (mask_t(1) << ix.g.n_cells); ++S) {
        double m = std::pow(xi_minus * ix.g.dt(), 0.5 * popcount(S));
        double p = std::pow(xi_plus * ix.g.dt(), 0.5 * popcount(S));
        for (long i = 0; i < ix.g.sectorDim(S); ++i) {
            wm[ix.index(S, i)] = m;
            wpInv[ix.index(S, i)] = 1.0 / p;
        }
    }
    return spectralNorm(wm.asDiagonal() * M * wpInv.asDiagonal());
}

double spectralNorm(const Mat& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    Eigen::BDCSVD<Mat> svd(M);
    return svd.singularValues()[0];
}

Vec Rng::vec(long n) {
    Vec v(n);
    for (long i = 0; i < n; ++i) v[i] = scalar();
    return v;
}

Mat Rng::mat(long r, long c) {
    Mat m(r, c);
    for (long j = 0; j < c; ++j)
        for (long i = 0; i < r; ++i) m(i, j) = scalar();
    return m;
}

Mat Rng::hermitian(long n) {
    Mat m = mat(n, n);
    return 0.5 * (m + m.adjoint());
}

Mat Rng::unitary(long n) {
    Eigen::HouseholderQR<Mat> qr(mat(n, n));
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (long i = 0; i < n; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
    return q;
}

}  // namespace qsc
