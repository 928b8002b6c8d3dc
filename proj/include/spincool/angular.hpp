#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "spincool/halfint.hpp"

namespace spincool {

// Canonical product basis |m_I> (x) |m_J>: index = idx_I*(2J+1) + idx_J with
// m_I descending from +I to -I and m_J descending from +J to -J.  This
// ordering is frozen; eigenvector files expose it bit-exactly.
struct ProductBasis {
    HalfInt I, J;

    int dim() const { return multiplicity(I) * multiplicity(J); }

    // -1 when the projections are not valid for (I, J)
    int index_of(HalfInt mI, HalfInt mJ) const {
        if (mI.twice() > I.twice() || mI.twice() < -I.twice()) return -1;
        if (mJ.twice() > J.twice() || mJ.twice() < -J.twice()) return -1;
        if ((I.twice() - mI.twice()) % 2 != 0 || (J.twice() - mJ.twice()) % 2 != 0) return -1;
        int idx_I = (I.twice() - mI.twice()) / 2;
        int idx_J = (J.twice() - mJ.twice()) / 2;
        return idx_I * multiplicity(J) + idx_J;
    }

    std::pair<HalfInt, HalfInt> at(int index) const {
        int nj = multiplicity(J);
        int idx_I = index / nj;
        int idx_J = index % nj;
        return {HalfInt::from_twice(I.twice() - 2 * idx_I),
                HalfInt::from_twice(J.twice() - 2 * idx_J)};
    }

    HalfInt m_F(int index) const {
        auto [mI, mJ] = at(index);
        return mI + mJ;
    }

    bool operator==(const ProductBasis&) const = default;
};

// Single-spin operators on the descending-m basis of one spin j.
// All entries real by construction.
struct SpinMatrices {
    Eigen::MatrixXd jz;      // diag(+j ... -j)
    Eigen::MatrixXd jplus;   // <m+1|J+|m> = sqrt(j(j+1) - m(m+1))
    Eigen::MatrixXd jminus;  // adjoint of jplus
};

SpinMatrices spin_matrices(HalfInt j);

// I.J = Iz Jz + (I+ J- + I- J+)/2 on the canonical product basis.
// Hermitian (exactly symmetric); commutes with Fz = Iz + Jz.
Eigen::MatrixXd idotj(HalfInt I, HalfInt J);

// [3(I.J)^2 + (3/2) I.J - I(I+1)J(J+1) 1] / [2 I J (2I-1)(2J-1)].
// Throws QuadrupoleUndefined for I <= 1/2 or J <= 1/2 (zero denominator).
Eigen::MatrixXd quadrupole_operator(HalfInt I, HalfInt J);

// Fz = Iz + Jz on the product basis (diagonal).
Eigen::VectorXd fz_diagonal(ProductBasis basis);

// <j1 m1; j2 m2 | F mF> with the Condon-Shortley phase; 0 when selection
// rules fail.  Throws InvalidSpins if a projection exceeds its spin.
// Racah sum with log-factorial tables, exact to ~1e-14 for 2j <= 40.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                      HalfInt F, HalfInt mF);

}  // namespace spincool
