// timing comparison of the serial and OpenMP paths for the two hot kernels:
// dense epsilon assembly and the kernel composition product
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "qsc/kernel.hpp"

using namespace qsc;

namespace {

Kernel randomKernel(const Grid& g, Rng& rng, int tables) {
    Kernel T{g, {}};
    for (int t = 0; t < tables; ++t) {
        TableKey k{};
        for (int c = 0; c < g.n_cells; ++c) {
            double u = rng.uniform();
            mask_t bit = mask_t(1) << c;
            if (u < 0.30)
                k.k00 |= bit;
            else if (u < 0.45)
                k.k0p |= bit;
            else if (u < 0.60)
                k.km0 |= bit;
            else if (u < 0.70)
                k.kmp |= bit;
        }
        T.add(k, Mat(0.7 * rng.mat(kernelOutDim(g, k), kernelInDim(g, k))));
    }
    return T;
}

template <typename F>
double timeIt(int reps, F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 8;
    int dim_h = argc > 2 ? std::atoi(argv[2]) : 2;
    int d = argc > 3 ? std::atoi(argv[3]) : 1;
    int tables = argc > 4 ? std::atoi(argv[4]) : 40;
    int reps = argc > 5 ? std::atoi(argv[5]) : 3;

    Grid g{1.0, n, dim_h, d};
    FockIndexer ix(g);
    Rng rng(97);
    Kernel A = randomKernel(g, rng, tables);
    Kernel B = randomKernel(g, rng, tables);

    std::printf("grid: n_cells=%d dim_h=%d d=%d, tables=%d, dense dim=%ld\n", n,
                dim_h, d, tables, ix.total);
    std::printf("%-16s %12s %12s %9s %12s\n", "operation", "serial ms",
                "parallel ms", "speedup", "max diff");

    Mat Ms, Mp;
    parallelFlag() = false;
    double ts = timeIt(reps, [&] { Ms = epsilonMatrix(A, ix); });
    parallelFlag() = true;
    double tp = timeIt(reps, [&] { Mp = epsilonMatrix(A, ix); });
    std::printf("%-16s %12.3f %12.3f %9.2f %12.3e\n", "epsilonMatrix", ts, tp,
                ts / tp, (Ms - Mp).norm());

    Kernel Ps{g, {}}, Pp{g, {}};
    parallelFlag() = false;
    ts = timeIt(reps, [&] { Ps = kernelProduct(A, B); });
    parallelFlag() = true;
    tp = timeIt(reps, [&] { Pp = kernelProduct(A, B); });
    double diff = 0;
    for (const auto& [k, blk] : Ps.tab) {
        const Mat* q = Pp.find(k);
        diff = std::max(diff, q ? (blk - *q).norm() : blk.norm());
    }
    std::printf("%-16s %12.3f %12.3f %9.2f %12.3e\n", "kernelProduct", ts, tp,
                ts / tp, diff);
    parallelFlag() = false;
    return 0;
}
