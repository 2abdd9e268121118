#pragma once
#include "qsc/kernel.hpp"

namespace qsc {

// triple of pairwise disjoint chains: annihilation, preserved (leg-carrying)
// and creation rows
struct TripleKey {
    mask_t minus = 0, zero = 0, plus = 0;
    bool operator==(const TripleKey& o) const {
        return minus == o.minus && zero == o.zero && plus == o.plus;
    }
    bool disjoint() const {
        return (minus & zero) == 0 && (minus & plus) == 0 && (zero & plus) == 0;
    }
};

struct TripleKeyHash {
    std::size_t operator()(const TripleKey& k) const {
        std::size_t h = k.minus;
        h = h * 0x9e3779b97f4a7c15ull + k.zero;
        h = h * 0x9e3779b97f4a7c15ull + k.plus;
        return h;
    }
};

// component (minus, zero, plus) is a vector in dim_h * d^|zero|, h slowest,
// one leg per zero cell ascending
struct TripleChainVector {
    Grid g;
    std::unordered_map<TripleKey, Vec, TripleKeyHash> comp;

    void add(const TripleKey& k, const Vec& v);
    const Vec* find(const TripleKey& k) const {
        auto it = comp.find(k);
        return it == comp.end() ? nullptr : &it->second;
    }
};

// sum over triples of dt^(|minus|+|zero|+|plus|) <a(plus, zero, minus), b(minus, zero, plus)>
cxd pseudoInner(const Grid& g, const TripleChainVector& a, const TripleChainVector& b);

// (Ja)(minus, zero, plus) = a(zero) when minus is empty, independent of plus
TripleChainVector embedJ(const Grid& g, const FockVector& a);

// (J*c)(S) = sum over plus chains disjoint from S of dt^|plus| c(plus, S, 0)
FockVector adjointJ(const Grid& g, const TripleChainVector& c);

// fiberwise action of the kernel: the table with preserved rows (k00, k0p)
// and columns (km0, k00) moves the a-component (m, km0|k00, kmp|k0p|p) to
// (m|km0|kmp, k00|k0p, p); no dt weights appear
TripleChainVector decomposableApply(const Kernel& T, const TripleChainVector& a);

// relative residual of J* T J a against the epsilon action on a
double spatialEpsilonCheck(const Kernel& T, const FockVector& a);

// relative xi-weighted norm of J* T* (J J*) T J a - J* T* T J a: the defect of
// inserting the pseudo-projection between decomposable factors, which mirrors
// the multiplicativity defect of epsilon on the grid
double projectionDefect(const Kernel& T, const FockVector& a, double xi = 1.0);

}  // namespace qsc
