#include "qsc/kernel.hpp"

namespace qsc {

static std::vector<int> catAsc(mask_t a, mask_t b) {
    std::vector<int> v = cellsOf(a), w = cellsOf(b);
    v.insert(v.end(), w.begin(), w.end());
    return v;
}

long kernelOutDim(const Grid& g, const TableKey& k) {
    return g.sectorDim(k.k00 | k.k0p);
}

long kernelInDim(const Grid& g, const TableKey& k) {
    return g.sectorDim(k.km0 | k.k00);
}

void Kernel::add(const TableKey& k, const Mat& block) {
    if (!k.disjoint()) throw std::logic_error("kernel table sets overlap");
    if (block.rows() != kernelOutDim(g, k) || block.cols() != kernelInDim(g, k))
        throw std::logic_error("kernel block shape mismatch");
    auto [it, fresh] = tab.emplace(k, block);
    if (!fresh) it->second += block;
}

Kernel unitKernel(const Grid& g) {
    Kernel I{g, {}};
    for (mask_t S = 0; S <= g.full(); ++S)
        I.add({S, 0, 0, 0}, Mat::Identity(g.sectorDim(S), g.sectorDim(S)));
    return I;
}

Kernel involution(const Kernel& T) {
    Kernel R{T.g, {}};
    for (const auto& [k, B] : T.tab) {
        TableKey rk{k.k00, k.km0, k.k0p, k.kmp};
        // the adjoint's rows live on B's column legs (k.km0, k.k00) and its
        // columns on B's row legs (k.k00, k.k0p); remap both into the canonical
        // group order of the swapped table
        std::vector<long> rowmap = legRemap(T.g.dim_h, T.g.d, catAsc(k.km0, k.k00),
                                            catAsc(rk.k00, rk.k0p));
        std::vector<long> colmap = legRemap(T.g.dim_h, T.g.d, catAsc(k.k00, k.k0p),
                                            catAsc(rk.km0, rk.k00));
        Mat out(kernelOutDim(T.g, rk), kernelInDim(T.g, rk));
        for (long r = 0; r < out.rows(); ++r)
            for (long c = 0; c < out.cols(); ++c)
                out(r, c) = std::conj(B(colmap[c], rowmap[r]));
        R.add(rk, out);
    }
    return R;
}

FockVector epsilonApply(const Kernel& T, const FockVector& a) {
    const Grid& g = T.g;
    FockVector out = zeroFock(g);
    for (const auto& [k, B] : T.tab) {
        mask_t O = k.k00 | k.k0p, U = k.km0 | k.k00;
        double w = std::pow(g.dt(), popcount(k.km0) + popcount(k.kmp));
        std::vector<long> rowmap =
            legRemap(g.dim_h, g.d, catAsc(k.k00, k.k0p), cellsOf(O));
        std::vector<long> colmap =
            legRemap(g.dim_h, g.d, catAsc(k.km0, k.k00), cellsOf(U));
        Vec vb(B.cols());
        for (long i = 0; i < vb.size(); ++i) vb[colmap[i]] = a[U][i];
        Vec r = B * vb;
        for (long i = 0; i < r.size(); ++i) out[O][i] += w * r[rowmap[i]];
    }
    return out;
}

Mat epsilonMatrix(const Kernel& T, const FockIndexer& ix) {
    const Grid& g = T.g;
    Mat M = Mat::Zero(ix.total, ix.total);
    // bucket tables by their input sector so column ranges never collide
    mask_t nsec = mask_t(1) << g.n_cells;
    std::vector<std::vector<std::pair<const TableKey*, const Mat*>>> bucket(nsec);
    for (const auto& [k, B] : T.tab) bucket[k.km0 | k.k00].emplace_back(&k, &B);
    bool par = parallelFlag();
#pragma omp parallel for schedule(dynamic, 16) if (par)
    for (long U = 0; U < long(nsec); ++U) {
        for (auto [kp, Bp] : bucket[U]) {
            const TableKey& k = *kp;
            const Mat& B = *Bp;
            mask_t O = k.k00 | k.k0p;
            double w = std::pow(g.dt(), popcount(k.km0) + popcount(k.kmp));
            std::vector<long> rowmap =
                legRemap(g.dim_h, g.d, catAsc(k.k00, k.k0p), cellsOf(O));
            std::vector<long> colmap =
                legRemap(g.dim_h, g.d, catAsc(k.km0, k.k00), cellsOf(mask_t(U)));
            for (long r = 0; r < B.rows(); ++r)
                for (long c = 0; c < B.cols(); ++c)
                    M(ix.offset[O] + r, ix.offset[U] + c) += w * B(rowmap[r], colmap[c]);
        }
    }
    return M;
}

Kernel kernelProduct(const Kernel& S, const Kernel& T) {
    const Grid& g = S.g;
    Kernel P{g, {}};
    for (const auto& [sk, SB] : S.tab) {
        for (const auto& [tk, TB] : T.tab) {
            // reconstruct the transfer sets from the pair of supports
            mask_t tm0 = sk.km0 & tk.k00;           // S annihilates what T preserves
            mask_t tmp = sk.km0 & ~tm0;             // S annihilates what T created
            if ((tmp & tk.k0p) != tmp) continue;
            mask_t t0p = tk.k0p & ~tmp;             // T creates what S preserves
            if ((t0p & sk.k00) != t0p) continue;
            mask_t k00 = tk.k00 & ~tm0;
            if (k00 != (sk.k00 & ~t0p)) continue;
            TableKey pk{k00, sk.k0p | t0p, tk.km0 | tm0, sk.kmp | tk.kmp | tmp};
            if ((sk.kmp & tk.kmp) || ((sk.kmp | tk.kmp) & tmp)) continue;
            if (!pk.disjoint()) continue;
            if (pk.all() != (sk.all() | tk.all())) continue;
            // contract T's outgoing legs (T00, T0p) with S's incoming (Sm0, S00)
            std::vector<long> tmap = legRemap(g.dim_h, g.d, catAsc(tk.k00, tk.k0p),
                                              catAsc(sk.km0, sk.k00));
            Mat Tperm(TB.rows(), TB.cols());
            for (long r = 0; r < TB.rows(); ++r) Tperm.row(r) = TB.row(tmap[r]);
            Mat C = SB * Tperm;
            std::vector<long> rowmap = legRemap(g.dim_h, g.d, catAsc(sk.k00, sk.k0p),
                                                catAsc(pk.k00, pk.k0p));
            std::vector<long> colmap = legRemap(g.dim_h, g.d, catAsc(tk.km0, tk.k00),
                                                catAsc(pk.km0, pk.k00));
            Mat out(C.rows(), C.cols());
            for (long r = 0; r < C.rows(); ++r)
                for (long c = 0; c < C.cols(); ++c) out(r, c) = C(rowmap[r], colmap[c]);
            P.add(pk, out);
        }
    }
    return P;
}

Zeta zetaStar(const Zeta& z) { return Zeta{z.z00, z.zm0, z.z0p, z.zmp}; }

Zeta zetaProduct(const Zeta& a, const Zeta& b) {
    Zeta r = a;
    for (std::size_t i = 0; i < r.z00.size(); ++i) {
        r.z00[i] = a.z00[i] * b.z00[i];
        r.z0p[i] = a.z00[i] * b.z0p[i] + a.z0p[i];
        r.zm0[i] = a.zm0[i] * b.z00[i] + b.zm0[i];
        r.zmp[i] = a.zm0[i] * b.z0p[i] + a.zmp[i] + b.zmp[i];
    }
    return r;
}

double zetaNorm(const Kernel& T, const Zeta& z) {
    double best = 0;
    for (const auto& [k, B] : T.tab) {
        double w = 1;
        for (int c : cellsOf(k.k00)) w *= z.z00[c];
        for (int c : cellsOf(k.k0p)) w *= z.z0p[c];
        for (int c : cellsOf(k.km0)) w *= z.zm0[c];
        for (int c : cellsOf(k.kmp)) w *= z.zmp[c];
        best = std::max(best, spectralNorm(B) / w);
    }
    return best;
}

OperatorBound zetaExponentBound(const Grid& g, const Zeta& z, double prefactor,
                                double xi_plus, double xi_minus) {
    double z00inf = 0, zmp1 = 0, zm02 = 0, z0p2 = 0;
    for (int c = 0; c < g.n_cells; ++c) {
        z00inf = std::max(z00inf, z.z00[c]);
        zmp1 += z.zmp[c] * g.dt();
        zm02 += z.zm0[c] * z.zm0[c] * g.dt();
        z0p2 += z.z0p[c] * z.z0p[c] * g.dt();
    }
    if (!(xi_plus * xi_minus > z00inf * z00inf))
        throw std::domain_error("no admissible eps > 0");
    double gap = std::sqrt((xi_plus - xi_minus) * (xi_plus - xi_minus) +
                           4 * z00inf * z00inf);
    double eps = 0.5 * (xi_plus + xi_minus - gap);
    double bound = std::exp(zmp1 + (zm02 + z0p2) / (2 * eps)) * prefactor;
    return {bound, eps};
}

OperatorBound epsilonOperatorBound(const Kernel& T, const Zeta& z, double xi_plus,
                                   double xi_minus) {
    return zetaExponentBound(T.g, z, zetaNorm(T, z), xi_plus, xi_minus);
}

Mat extendByIdentity(const Grid& g, const TableKey& key, const Mat& block, mask_t add) {
    if (add & key.all()) throw std::logic_error("extendByIdentity: cells collide");
    long da = 1;
    for (int i = popcount(add); i > 0; --i) da *= g.d;
    // tensor the paired identity legs on at the end (add legs fastest), then
    // remap both sides into canonical ascending group order
    Mat wide = Mat::Zero(block.rows() * da, block.cols() * da);
    for (long r = 0; r < block.rows(); ++r)
        for (long c = 0; c < block.cols(); ++c)
            for (long e = 0; e < da; ++e) wide(r * da + e, c * da + e) = block(r, c);
    TableKey nk{key.k00 | add, key.k0p, key.km0, key.kmp};
    std::vector<int> rsrc = catAsc(key.k00, key.k0p);
    for (int c : cellsOf(add)) rsrc.push_back(c);
    std::vector<int> csrc = catAsc(key.km0, key.k00);
    for (int c : cellsOf(add)) csrc.push_back(c);
    std::vector<long> rowmap = legRemap(g.dim_h, g.d, rsrc, catAsc(nk.k00, nk.k0p));
    std::vector<long> colmap = legRemap(g.dim_h, g.d, csrc, catAsc(nk.km0, nk.k00));
    Mat out(wide.rows(), wide.cols());
    for (long r = 0; r < out.rows(); ++r)
        for (long c = 0; c < out.cols(); ++c) out(r, c) = wide(rowmap[r], colmap[c]);
    return out;
}

Kernel wickFromIntegrand(const Kernel& L, double t) {
    const Grid& g = L.g;
    mask_t past = g.cellsBefore(t);
    Kernel T{g, {}};
    for (const auto& [k, B] : L.tab) {
        if (k.all() & ~past) continue;
        mask_t free = g.full() & ~k.all();
        for (mask_t c = free;; c = (c - 1) & free) {
            T.add(TableKey{k.k00 | c, k.k0p, k.km0, k.kmp},
                  extendByIdentity(g, k, B, c));
            if (c == 0) break;
        }
    }
    return T;
}

Kernel integrandFromWick(const Kernel& T) {
    const Grid& g = T.g;
    Kernel L{g, {}};
    // L(k) = sum_{c inside k00} (-1)^|c| T(k00 minus c) x I(c); gathered from
    // the source side so that keys absent from T but reachable by inserting
    // identity cells still receive their alternating contributions
    for (const auto& [k, B] : T.tab) {
        mask_t free = g.full() & ~k.all();
        for (mask_t c = free;; c = (c - 1) & free) {
            L.add(TableKey{k.k00 | c, k.k0p, k.km0, k.kmp},
                  (popcount(c) % 2 ? -1.0 : 1.0) * extendByIdentity(g, k, B, c));
            if (c == 0) break;
        }
    }
    // drop numerically vanished tables
    for (auto it = L.tab.begin(); it != L.tab.end();)
        it = (it->second.norm() < 1e-14) ? L.tab.erase(it) : std::next(it);
    return L;
}

}  // namespace qsc
