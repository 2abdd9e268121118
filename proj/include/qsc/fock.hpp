#pragma once
#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace qsc {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using mask_t = std::uint32_t;

inline int popcount(mask_t m) { return __builtin_popcount(m); }

// position of cell among the set bits of `set`, counting from the lowest cell
inline int rankIn(mask_t set, int cell) {
    return popcount(set & ((mask_t(1) << cell) - 1));
}

std::vector<int> cellsOf(mask_t m);  // ascending

// runtime switch between the OpenMP and serial reference paths
bool& parallelFlag();

// time grid [0,horizon) split into n_cells cells, each carrying a multiplicity-d
// one-point space; the chain space over a cell subset S has dimension dim_h * d^|S|
struct Grid {
    double horizon = 1.0;
    int n_cells = 1;
    int dim_h = 1;
    int d = 1;

    double dt() const { return horizon / n_cells; }
    double timeOf(int cell) const { return cell * dt(); }
    mask_t full() const { return (mask_t(1) << n_cells) - 1; }
    long sectorDim(mask_t S) const {
        long r = dim_h;
        for (int i = popcount(S); i > 0; --i) r *= d;
        return r;
    }
    // cells with t(x) < t
    mask_t cellsBefore(double t) const {
        mask_t m = 0;
        for (int c = 0; c < n_cells; ++c)
            if (timeOf(c) < t - 1e-12) m |= mask_t(1) << c;
        return m;
    }
    void validate() const;
};

// a(S) for every S: flat layout is h slowest, then one d-leg per cell of S in
// ascending cell order, last leg fastest
using FockVector = std::vector<Vec>;

FockVector zeroFock(const Grid& g);
FockVector basisFock(const Grid& g, mask_t S, long idx);

// sum_S f(S) dt^|S|
cxd chainIntegral(const Grid& g, const std::function<cxd(mask_t)>& f);

// sqrt( sum_S xi^|S| dt^|S| ||a(S)||^2 ), compensated summation
double xiNorm(const Grid& g, const FockVector& a, double xi);

// sum_S xi^|S| dt^|S| <a(S), b(S)>
cxd fockInner(const Grid& g, const FockVector& a, const FockVector& b, double xi = 1.0);

// e(k): sector S carries h0 tensor prod_{x in S} k(x)
FockVector exponentialVector(const Grid& g, const Vec& h0,
                             const std::function<Vec(int)>& k);

// [da(x)]_e (S) = a(S u {x}) with the x-leg fixed to e; zero on sectors containing x
std::vector<FockVector> pointDerivative(const Grid& g, const FockVector& a, int x);

// dense full-space indexing: sectors concatenated in increasing mask order
struct FockIndexer {
    Grid g;
    std::vector<long> offset;
    long total = 0;
    explicit FockIndexer(const Grid& gr);
    long index(mask_t S, long flat) const { return offset[S] + flat; }
};

Vec packFock(const FockIndexer& ix, const FockVector& a);
FockVector unpackFock(const FockIndexer& ix, const Vec& v);

// dense matrix of a sector-map operator
Mat denseOperator(const FockIndexer& ix,
                  const std::function<FockVector(const FockVector&)>& op);

// flat-index remap between two leg orderings of the same cell set:
// r[destFlat] = srcFlat with equal h and equal per-cell leg values
std::vector<long> legRemap(int dim_h, int d, const std::vector<int>& srcCells,
                           const std::vector<int>& destCells);

// ||W- M W+^{-1}||_2 with W_xi = diag over sectors of sqrt(xi^|S| dt^|S|)
double relativeNorm(const FockIndexer& ix, const Mat& M, double xi_plus, double xi_minus);

double spectralNorm(const Mat& M);

// deterministic stream: raw mt19937_64 words mapped to [0,1) as (x>>11)*2^-53
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double uniform() { return (eng() >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * uniform() - 1.0; }
    cxd scalar() { return cxd(symmetric(), symmetric()); }
    Vec vec(long n);
    Mat mat(long r, long c);
    Mat hermitian(long n);
    Mat unitary(long n);
};

struct Kahan {
    long double s = 0, c = 0;
    void add(long double x) {
        long double y = x - c, t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

}  // namespace qsc
