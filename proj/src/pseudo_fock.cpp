#include "qsc/pseudo_fock.hpp"

namespace qsc {

namespace {

std::vector<int> catAsc(mask_t a, mask_t b) {
    std::vector<int> v = cellsOf(a), w = cellsOf(b);
    v.insert(v.end(), w.begin(), w.end());
    return v;
}

}  // namespace

void TripleChainVector::add(const TripleKey& k, const Vec& v) {
    if (!k.disjoint()) throw std::logic_error("triple chains overlap");
    if (v.size() != g.sectorDim(k.zero))
        throw std::logic_error("triple component size mismatch");
    auto [it, fresh] = comp.emplace(k, v);
    if (!fresh) it->second += v;
}

cxd pseudoInner(const Grid& g, const TripleChainVector& a,
                const TripleChainVector& b) {
    Kahan re, im;
    for (const auto& [k, bv] : b.comp) {
        const Vec* av = a.find(TripleKey{k.plus, k.zero, k.minus});
        if (!av) continue;
        double w = std::pow(g.dt(), popcount(k.minus | k.zero | k.plus));
        cxd s = w * av->dot(bv);
        re.add(s.real());
        im.add(s.imag());
    }
    return cxd(double(re.s), double(im.s));
}

TripleChainVector embedJ(const Grid& g, const FockVector& a) {
    TripleChainVector c{g, {}};
    for (mask_t zero = 0; zero <= g.full(); ++zero) {
        mask_t free = g.full() & ~zero;
        for (mask_t plus = free;; plus = (plus - 1) & free) {
            c.add(TripleKey{0, zero, plus}, a[zero]);
            if (plus == 0) break;
        }
    }
    return c;
}

FockVector adjointJ(const Grid& g, const TripleChainVector& c) {
    FockVector a = zeroFock(g);
    for (mask_t S = 0; S <= g.full(); ++S) {
        mask_t free = g.full() & ~S;
        for (mask_t plus = free;; plus = (plus - 1) & free) {
            const Vec* v = c.find(TripleKey{plus, S, 0});
            if (v) a[S] += std::pow(g.dt(), popcount(plus)) * (*v);
            if (plus == 0) break;
        }
    }
    return a;
}

TripleChainVector decomposableApply(const Kernel& T, const TripleChainVector& a) {
    const Grid& g = T.g;
    TripleChainVector out{g, {}};
    for (const auto& [k, B] : T.tab) {
        mask_t mid = k.km0 | k.k00;
        mask_t upper = k.kmp | k.k0p;
        std::vector<long> colmap =
            legRemap(g.dim_h, g.d, cellsOf(mid), catAsc(k.km0, k.k00));
        std::vector<long> rowmap =
            legRemap(g.dim_h, g.d, catAsc(k.k00, k.k0p), cellsOf(k.k00 | k.k0p));
        for (const auto& [ak, av] : a.comp) {
            if (ak.zero != mid) continue;
            if ((upper & ak.plus) != upper) continue;
            if (ak.minus & (k.all() | ak.plus)) continue;
            TripleKey ok{ak.minus | k.km0 | k.kmp, k.k00 | k.k0p,
                         ak.plus & ~upper};
            Vec vb(B.cols());
            for (long i = 0; i < vb.size(); ++i) vb[i] = av[colmap[i]];
            Vec r = B * vb;
            Vec ov(r.size());
            for (long i = 0; i < ov.size(); ++i) ov[i] = r[rowmap[i]];
            out.add(ok, ov);
        }
    }
    return out;
}

double spatialEpsilonCheck(const Kernel& T, const FockVector& a) {
    const Grid& g = T.g;
    FockVector lhs = adjointJ(g, decomposableApply(T, embedJ(g, a)));
    FockVector rhs = epsilonApply(T, a);
    double num = 0, den = 0;
    for (mask_t S = 0; S <= g.full(); ++S) {
        num += (lhs[S] - rhs[S]).squaredNorm();
        den += rhs[S].squaredNorm();
    }
    return std::sqrt(num) / std::max(1.0, std::sqrt(den));
}

double projectionDefect(const Kernel& T, const FockVector& a, double xi) {
    const Grid& g = T.g;
    Kernel Ts = involution(T);
    TripleChainVector x = decomposableApply(T, embedJ(g, a));
    TripleChainVector xe = embedJ(g, adjointJ(g, x));
    FockVector with = adjointJ(g, decomposableApply(Ts, xe));
    FockVector without = adjointJ(g, decomposableApply(Ts, x));
    FockVector diff = zeroFock(g);
    for (mask_t S = 0; S <= g.full(); ++S) diff[S] = with[S] - without[S];
    return xiNorm(g, diff, xi) / std::max(1.0, xiNorm(g, without, xi));
}

}  // namespace qsc
