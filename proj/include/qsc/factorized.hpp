#pragma once
#include <limits>

#include "qsc/kernel.hpp"
#include "qsc/point_matrix.hpp"

namespace qsc {

// kernel given by an initial factor X and one one-point matrix per cell; the
// block at a table is the chronological semitensor product of the role blocks,
// latest cell leftmost, applied to X
struct FactorizedKernel {
    Grid g;
    Mat X;
    std::vector<PointMatrix> f;
};

// expand all tables; cells at or after the cutoff act as identity insertions
// (preserved role with identity block, or absent)
Kernel expandFactorized(const FactorizedKernel& fk,
                        double t = std::numeric_limits<double>::infinity());

// evolution kernel at time t driven by per-cell factors F with initial U0
Kernel chronoKernel(const Grid& g, const std::vector<PointMatrix>& F, const Mat& U0,
                    double t);

// factorized kernel of the second quantization of a per-cell map w on the
// multiplicity space: preserved role carries I_h tensor w, all others vanish
FactorizedKernel secondQuantization(const Grid& g, const Mat& w);

}  // namespace qsc
