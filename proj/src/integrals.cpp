#include "qsc/integrals.hpp"

namespace qsc {

namespace {

std::vector<int> catAsc(mask_t a, mask_t b) {
    std::vector<int> v = cellsOf(a), w = cellsOf(b);
    v.insert(v.end(), w.begin(), w.end());
    return v;
}

long legDim(int d, int nlegs) {
    long r = 1;
    for (int i = 0; i < nlegs; ++i) r *= d;
    return r;
}

// full index map of one leg slice: red[i] gives the full flat index with the
// leg at position pos fixed to val; pos < 0 means no slicing
std::vector<long> legSliceIdx(long nchain, int nlegs, int pos, int val, int d) {
    if (pos < 0) {
        std::vector<long> idx(nchain * legDim(d, nlegs));
        for (long i = 0; i < long(idx.size()); ++i) idx[i] = i;
        return idx;
    }
    long dred = 1;
    for (int i = 0; i < nlegs - 1; ++i) dred *= d;
    std::vector<long> idx(nchain * dred);
    std::vector<int> e(nlegs);
    for (long chain = 0; chain < nchain; ++chain)
        for (long ef = 0; ef < dred; ++ef) {
            long rest = ef;
            for (int j = nlegs - 2; j >= 0; --j) {
                e[j < pos ? j : j + 1] = int(rest % d);
                rest /= d;
            }
            e[pos] = val;
            long full = chain;
            for (int j = 0; j < nlegs; ++j) full = full * d + e[j];
            idx[chain * dred + ef] = full;
        }
    return idx;
}

// index of the a-entry feeding each block column, or -1
std::vector<long> extractMap(const FockIndexer& ix, const TableKey& th,
                             mask_t avoidIn) {
    const Grid& g = ix.g;
    int nin = popcount(th.km0 | th.k00);
    long dlin = legDim(g.d, nin);
    std::vector<long> m(ix.total * dlin, -1);
    std::vector<int> inCells = catAsc(th.km0, th.k00);
    for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S) {
        if (S & (th.all() | avoidIn)) continue;
        mask_t sector = S | th.km0 | th.k00;
        std::vector<int> dest = cellsOf(S);
        dest.insert(dest.end(), inCells.begin(), inCells.end());
        std::vector<long> r = legRemap(g.dim_h, g.d, cellsOf(sector), dest);
        for (long df = 0; df < long(r.size()); ++df)
            m[(ix.offset[S] + df / dlin) * dlin + df % dlin] =
                ix.offset[sector] + r[df];
    }
    return m;
}

// output index receiving each block row, or -1
std::vector<long> reattachMap(const FockIndexer& ix, const TableKey& th,
                              mask_t avoidOut) {
    const Grid& g = ix.g;
    int nout = popcount(th.k00 | th.k0p);
    long dlout = legDim(g.d, nout);
    std::vector<long> m(ix.total * dlout, -1);
    std::vector<int> outCells = catAsc(th.k00, th.k0p);
    for (mask_t R = 0; R < (mask_t(1) << g.n_cells); ++R) {
        if (R & (th.all() | avoidOut)) continue;
        mask_t outsec = R | th.k00 | th.k0p;
        std::vector<int> src = cellsOf(R);
        src.insert(src.end(), outCells.begin(), outCells.end());
        std::vector<long> r = legRemap(g.dim_h, g.d, src, cellsOf(outsec));
        for (long of = 0; of < long(r.size()); ++of)
            m[(ix.offset[R] + r[of] / dlout) * dlout + r[of] % dlout] =
                ix.offset[outsec] + of;
    }
    return m;
}

// M(rowOff + out, colOff + in) += w * sub(r, c) through the two partial maps
void addTableDense(Mat& M, const Mat& sub, double w, const std::vector<long>& rmap,
                   const std::vector<long>& cmap, long rowStride, long rowOff,
                   long colStride, long colOff) {
    for (long r = 0; r < sub.rows(); ++r) {
        if (rmap[r] < 0) continue;
        for (long c = 0; c < sub.cols(); ++c) {
            if (cmap[c] < 0) continue;
            M(rmap[r] * rowStride + rowOff, cmap[c] * colStride + colOff) +=
                w * sub(r, c);
        }
    }
}

int findPos(const std::vector<int>& cells, int x) {
    for (int i = 0; i < int(cells.size()); ++i)
        if (cells[i] == x) return i;
    return -1;
}

}  // namespace

void Integrand::add(const FockIndexer& ix, const TableKey& k, const Mat& block) {
    if (!k.disjoint()) throw std::logic_error("integrand table sets overlap");
    long rows = ix.total * legDim(g.d, popcount(k.k00 | k.k0p));
    long cols = ix.total * legDim(g.d, popcount(k.km0 | k.k00));
    if (block.rows() != rows || block.cols() != cols)
        throw std::logic_error("integrand block shape mismatch");
    auto [it, fresh] = tab.emplace(k, block);
    if (!fresh) it->second += block;
}

Mat multipleMatrix(const Integrand& B, const FockIndexer& ix, double t) {
    const Grid& g = ix.g;
    mask_t past = g.cellsBefore(t);
    Mat M = Mat::Zero(ix.total, ix.total);
    for (const auto& [k, block] : B.tab) {
        if (k.all() & ~past) continue;
        double w = std::pow(g.dt(), popcount(k.km0) + popcount(k.kmp));
        std::vector<long> cmap = extractMap(ix, k, 0);
        std::vector<long> rmap = reattachMap(ix, k, 0);
        addTableDense(M, block, w, rmap, cmap, 1, 0, 1, 0);
    }
    return M;
}

Vec multipleApply(const Integrand& B, const FockIndexer& ix, double t, const Vec& a) {
    return multipleMatrix(B, ix, t) * a;
}

Mat qsDerivative(const Integrand& B, const FockIndexer& ix, int x, PointRole role) {
    const Grid& g = ix.g;
    mask_t xbit = mask_t(1) << x;
    mask_t past = g.cellsBefore(g.timeOf(x));
    bool inLeg = role == PointRole::gauge || role == PointRole::annihilation;
    bool outLeg = role == PointRole::gauge || role == PointRole::creation;
    long dxi = inLeg ? g.d : 1, dxo = outLeg ? g.d : 1;
    Mat D = Mat::Zero(ix.total * dxo, ix.total * dxi);
    for (const auto& [k, block] : B.tab) {
        mask_t rolemask = role == PointRole::gauge        ? k.k00
                          : role == PointRole::creation   ? k.k0p
                          : role == PointRole::annihilation ? k.km0
                                                            : k.kmp;
        if (!(rolemask & xbit)) continue;
        if ((k.all() & ~xbit) & ~past) continue;
        TableKey th{k.k00 & ~xbit, k.k0p & ~xbit, k.km0 & ~xbit, k.kmp & ~xbit};
        double w = std::pow(g.dt(), popcount(th.km0) + popcount(th.kmp));
        int rpos = outLeg ? findPos(catAsc(k.k00, k.k0p), x) : -1;
        int cpos = inLeg ? findPos(catAsc(k.km0, k.k00), x) : -1;
        int nRL = popcount(k.k00 | k.k0p), nCL = popcount(k.km0 | k.k00);
        std::vector<long> cmap = extractMap(ix, th, xbit);
        std::vector<long> rmap = reattachMap(ix, th, xbit);
        for (int vo = 0; vo < dxo; ++vo)
            for (int vi = 0; vi < dxi; ++vi) {
                std::vector<long> ri = legSliceIdx(ix.total, nRL, rpos, vo, g.d);
                std::vector<long> ci = legSliceIdx(ix.total, nCL, cpos, vi, g.d);
                Mat sub(ri.size(), ci.size());
                for (long r = 0; r < sub.rows(); ++r)
                    for (long c = 0; c < sub.cols(); ++c)
                        sub(r, c) = block(ri[r], ci[c]);
                addTableDense(D, sub, w, rmap, cmap, dxo, vo, dxi, vi);
            }
    }
    return D;
}

Vec singleCell(const FockIndexer& ix, PointRole role, const Mat& D, int x,
               const Vec& a) {
    const Grid& g = ix.g;
    mask_t xbit = mask_t(1) << x;
    bool inLeg = role == PointRole::gauge || role == PointRole::annihilation;
    bool outLeg = role == PointRole::gauge || role == PointRole::creation;
    Vec w;
    if (inLeg) {
        // point derivative of a, leg fastest
        w = Vec::Zero(ix.total * g.d);
        for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S) {
            if (S & xbit) continue;
            mask_t sec = S | xbit;
            std::vector<int> dest = cellsOf(S);
            dest.push_back(x);
            std::vector<long> m = legRemap(g.dim_h, g.d, cellsOf(sec), dest);
            for (long df = 0; df < long(m.size()); ++df)
                w[(ix.offset[S] + df / g.d) * g.d + df % g.d] =
                    a[ix.offset[sec] + m[df]];
        }
    } else {
        w = a;
    }
    Vec u = D * w;
    Vec out = Vec::Zero(ix.total);
    if (outLeg) {
        for (mask_t R = 0; R < (mask_t(1) << g.n_cells); ++R) {
            if (R & xbit) continue;
            mask_t outsec = R | xbit;
            std::vector<int> src = cellsOf(R);
            src.push_back(x);
            std::vector<long> m = legRemap(g.dim_h, g.d, src, cellsOf(outsec));
            for (long of = 0; of < long(m.size()); ++of)
                out[ix.offset[outsec] + of] +=
                    u[(ix.offset[R] + m[of] / g.d) * g.d + m[of] % g.d];
        }
    } else {
        for (mask_t R = 0; R < (mask_t(1) << g.n_cells); ++R) {
            if (R & xbit) continue;
            out.segment(ix.offset[R], g.sectorDim(R)) +=
                g.dt() * u.segment(ix.offset[R], g.sectorDim(R));
        }
    }
    return out;
}

Vec singleIntegral(const FockIndexer& ix, PointRole role, const PointFamily& D,
                   double t, const Vec& a) {
    Vec out = Vec::Zero(ix.total);
    for (int x = 0; x < ix.g.n_cells; ++x)
        if (ix.g.timeOf(x) < t - 1e-12) out += singleCell(ix, role, D[x], x, a);
    return out;
}

Integrand conjugateIntegrand(const Integrand& B, const FockIndexer& ix) {
    const Grid& g = ix.g;
    Integrand R{g, {}};
    Eigen::VectorXd wgt(ix.total);
    for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S)
        for (long i = 0; i < g.sectorDim(S); ++i)
            wgt[ix.offset[S] + i] = std::pow(g.dt(), popcount(S));
    for (const auto& [k, block] : B.tab) {
        TableKey rk{k.k00, k.km0, k.k0p, k.kmp};
        long dlo = legDim(g.d, popcount(rk.k00 | rk.k0p));
        long dli = legDim(g.d, popcount(rk.km0 | rk.k00));
        // leg permutations: adjoint rows carry (k.km0, k.k00), target
        // (rk.k00, rk.k0p); adjoint cols carry (k.k00, k.k0p), target
        // (rk.km0, rk.k00)
        std::vector<long> rp =
            legRemap(1, g.d, catAsc(k.km0, k.k00), catAsc(rk.k00, rk.k0p));
        std::vector<long> cp =
            legRemap(1, g.d, catAsc(k.k00, k.k0p), catAsc(rk.km0, rk.k00));
        Mat out(ix.total * dlo, ix.total * dli);
        for (long ro = 0; ro < ix.total; ++ro)
            for (long lo = 0; lo < dlo; ++lo)
                for (long ci = 0; ci < ix.total; ++ci)
                    for (long li = 0; li < dli; ++li)
                        out(ro * dlo + lo, ci * dli + li) =
                            std::conj(block(ci * dli + cp[li], ro * dlo + rp[lo])) *
                            wgt[ci] / wgt[ro];
        R.add(ix, rk, out);
    }
    return R;
}

static double relLegNorm(const FockIndexer& ix, const Mat& block, double xi_plus,
                         double xi_minus) {
    long dlo = block.rows() / ix.total, dli = block.cols() / ix.total;
    Vec wm(block.rows()), wp(block.cols());
    for (mask_t S = 0; S < (mask_t(1) << ix.g.n_cells); ++S)
        for (long i = 0; i < ix.g.sectorDim(S); ++i) {
            double m = std::pow(xi_minus * ix.g.dt(), 0.5 * popcount(S));
            double p = std::pow(xi_plus * ix.g.dt(), 0.5 * popcount(S));
            for (long e = 0; e < dlo; ++e) wm[(ix.offset[S] + i) * dlo + e] = m;
            for (long e = 0; e < dli; ++e)
                wp[(ix.offset[S] + i) * dli + e] = 1.0 / p;
        }
    return spectralNorm(wm.asDiagonal() * block * wp.asDiagonal());
}

double integrandNorm(const Integrand& B, const FockIndexer& ix, double t,
                     const EtaSix& eta) {
    const Grid& g = ix.g;
    mask_t past = g.cellsBefore(t);
    Kahan total;
    for (mask_t tmp = past;; tmp = (tmp - 1) & past) {
        mask_t f1 = past & ~tmp;
        Kahan inner;
        for (mask_t tm0 = f1;; tm0 = (tm0 - 1) & f1) {
            mask_t f2 = f1 & ~tm0;
            for (mask_t t0p = f2;; t0p = (t0p - 1) & f2) {
                mask_t f3 = f2 & ~t0p;
                double sup = 0;
                for (mask_t t00 = f3;; t00 = (t00 - 1) & f3) {
                    const Mat* b = B.find({t00, t0p, tm0, tmp});
                    if (b) {
                        double v = std::pow(eta.lo_0 / eta.up_0, 0.5 * popcount(t00)) *
                                   relLegNorm(ix, *b, eta.up_p, eta.lo_m);
                        sup = std::max(sup, v);
                    }
                    if (t00 == 0) break;
                }
                inner.add(std::pow(g.dt(), popcount(t0p) + popcount(tm0)) *
                          std::pow(eta.lo_p, popcount(t0p)) /
                          std::pow(eta.up_m, popcount(tm0)) * sup * sup);
                if (t0p == 0) break;
            }
            if (tm0 == 0) break;
        }
        total.add(std::pow(g.dt(), popcount(tmp)) * std::sqrt(double(inner.s)));
        if (tmp == 0) break;
    }
    return double(total.s);
}

Vec itoSumIntegral(const FockIndexer& ix, PointRole role, const PointFamily& D,
                   const StepProcess& U, double t, const Vec& a) {
    Vec out = Vec::Zero(ix.total);
    for (int x = 0; x < ix.g.n_cells; ++x)
        if (ix.g.timeOf(x) < t - 1e-12)
            out += singleCell(ix, role, D[x], x, U[x] * a);
    return out;
}

Mat liftWithLeg(const Mat& U, int d) {
    Mat M = Mat::Zero(U.rows() * d, U.cols() * d);
    for (long i = 0; i < U.rows(); ++i)
        for (long j = 0; j < U.cols(); ++j)
            for (int e = 0; e < d; ++e) M(i * d + e, j * d + e) = U(i, j);
    return M;
}

Mat denseAnnihilator(const FockIndexer& ix, int c, int e) {
    const Grid& g = ix.g;
    mask_t bit = mask_t(1) << c;
    Mat M = Mat::Zero(ix.total, ix.total);
    for (mask_t S = 0; S < (mask_t(1) << g.n_cells); ++S) {
        if (S & bit) continue;
        mask_t sec = S | bit;
        std::vector<int> dest = cellsOf(S);
        dest.push_back(c);
        std::vector<long> m = legRemap(g.dim_h, g.d, cellsOf(sec), dest);
        for (long df = 0; df < long(m.size()); ++df)
            if (df % g.d == e)
                M(ix.offset[S] + df / g.d, ix.offset[sec] + m[df]) = 1.0;
    }
    return M;
}

Mat denseCreator(const FockIndexer& ix, int c, int e) {
    return denseAnnihilator(ix, c, e).transpose();
}

double adaptednessTest(const FockIndexer& ix, const Mat& W, double t) {
    const Grid& g = ix.g;
    double wn = W.norm();
    if (wn == 0) return 0;
    double worst = 0;
    for (int c = 0; c < g.n_cells; ++c) {
        if (g.timeOf(c) < t - 1e-12) continue;
        for (int e = 0; e < g.d; ++e) {
            Mat A = denseAnnihilator(ix, c, e);
            Mat C = denseCreator(ix, c, e);
            worst = std::max(worst, (W * A - A * W).norm() / (wn * A.norm()));
            worst = std::max(worst, (W * C - C * W).norm() / (wn * C.norm()));
        }
    }
    return worst;
}

}  // namespace qsc
