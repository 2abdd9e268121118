#pragma once
#include "qsc/kernel.hpp"

namespace qsc {

// table-valued integrand: at each table a full-space operator carrying one free
// d-leg per table cell; layout is chain index slowest, then row legs
// (k00 asc, k0p asc) / column legs (km0 asc, k00 asc), last leg fastest
struct Integrand {
    Grid g;
    std::unordered_map<TableKey, Mat, TableKeyHash> tab;

    void add(const FockIndexer& ix, const TableKey& k, const Mat& block);
    const Mat* find(const TableKey& k) const {
        auto it = tab.find(k);
        return it == tab.end() ? nullptr : &it->second;
    }
};

enum class PointRole { gauge, creation, annihilation, time_ };

// action of the multiple integral over [0,t): for each table, annihilated and
// scalar cells are summed outside the output chain with dt weights, preserved
// and created cells are reattached to it
Vec multipleApply(const Integrand& B, const FockIndexer& ix, double t, const Vec& a);
Mat multipleMatrix(const Integrand& B, const FockIndexer& ix, double t);

// QS derivative at point x in the given role: the dense operator (with a free
// x-leg according to the role) integrating the x-shifted tables over [0,t(x))
Mat qsDerivative(const Integrand& B, const FockIndexer& ix, int x, PointRole role);

// one-point integrator family: per-cell dense operators with the role's legs
// (gauge Nd x Nd, creation Nd x N, annihilation N x Nd, time N x N; the point
// leg is the fastest index)
using PointFamily = std::vector<Mat>;

// contribution of cell x alone to the QS integral of the family
Vec singleCell(const FockIndexer& ix, PointRole role, const Mat& D, int x,
               const Vec& a);
// sum over cells with t(x) < t
Vec singleIntegral(const FockIndexer& ix, PointRole role, const PointFamily& D,
                   double t, const Vec& a);

// B*(table) swaps created and annihilated cells and takes the adjoint under the
// chain measure
Integrand conjugateIntegrand(const Integrand& B, const FockIndexer& ix);

struct EtaSix {
    double up_m, up_0, up_p;  // weights for annihilated, preserved, created rows
    double lo_m, lo_0, lo_p;
};

// sum over scalar chains of dt^|mp| times the square root of the weighted
// double sum over created/annihilated chains of the squared sup over preserved
// chains of (lo_0/up_0)^{|00|/2} times the (up_p -> lo_m)-relative block norm
double integrandNorm(const Integrand& B, const FockIndexer& ix, double t,
                     const EtaSix& eta);

// adapted step process: one dense full-space operator per cell, constant on it
using StepProcess = std::vector<Mat>;

// sum over cells of the one-cell integral increments applied after the step
// value at the cell's left end
Vec itoSumIntegral(const FockIndexer& ix, PointRole role, const PointFamily& D,
                   const StepProcess& U, double t, const Vec& a);

// lift of an operator on the chain space to carry a spectator point leg
Mat liftWithLeg(const Mat& U, int d);

// a(S u c) with the c-leg fixed, as a dense matrix per leg value
Mat denseAnnihilator(const FockIndexer& ix, int c, int e);
Mat denseCreator(const FockIndexer& ix, int c, int e);

// largest normalized commutator of W with creators and annihilators on cells
// at or after t; small values certify adaptedness
double adaptednessTest(const FockIndexer& ix, const Mat& W, double t);

}  // namespace qsc
