#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "spincool/angular.hpp"
#include "spincool/halfint.hpp"
#include "spincool/parallel.hpp"
#include "spincool/species.hpp"

namespace spincool {

// (m_I, m_J) identity of an eigenstate.  m_F is exact (Fz symmetry); the
// m_I/m_J pair is the high-field product-state identity: the dominant
// component for a single diagonalization, or the label propagated down from
// the highest field of a sweep (adiabatic labeling).
struct StateLabel {
    HalfInt m_F;
    HalfInt m_I;
    HalfInt m_J;
    bool operator==(const StateLabel&) const = default;
};

struct EigenSystem {
    double B_T = 0.0;
    ProductBasis basis;
    Eigen::VectorXd energies_MHz;  // ascending; degenerate groups ordered by m_F descending
    Eigen::MatrixXd vectors;       // orthonormal eigencolumns, canonical product basis
    std::vector<StateLabel> labels;

    int dim() const { return static_cast<int>(energies_MHz.size()); }
    // index by product-state label; throws NoSuchState
    int index_of(HalfInt mI, HalfInt mJ) const;
    // all state indices with the given exact m_F
    std::vector<int> block(HalfInt mF) const;
};

// c_q amplitudes of an eigenstate of a J=1 manifold:
// |m_F> = sum_q c_q |m_I = m_F - q>|m_J = q>, q in {-1, 0, +1}.
// Phase convention: the largest-magnitude c_q is real positive (inherited
// from the eigenvector sign fixing).
struct ExpansionCoefficients {
    HalfInt m_F;
    std::array<double, 3> c{};  // index q+1
    double c_q(int q) const { return c[q + 1]; }
};

// H = A I.J + Q T_quad + gJ muB B Jz - gI muN B Iz   (E/h, MHz)
// The field is along z.  The quadrupole term is included only when defined;
// a nonzero Q with I <= 1/2 or J <= 1/2 propagates QuadrupoleUndefined.
Eigen::MatrixXd build_hamiltonian(const LevelParams& level, HalfInt I, double B_T);

// Dense symmetric eigendecomposition with deterministic ordering and
// eigenvector signs.  m_F labels are filled from the support block; m_I/m_J
// are the dominant-component labels.  Throws NotHermitian above 1e-9
// relative asymmetry.
EigenSystem diagonalize(const Eigen::MatrixXd& H, const ProductBasis& basis, double B_T);

EigenSystem eigensystem_at(const LevelParams& level, HalfInt I, double B_T);

// Which x parameter the closed-form energy uses.  The conventional pairing
// (g_J with mu_B) reproduces the numerical diagonalization exactly and is
// the default; the transposed pairing (g_I with mu_B) is kept selectable for
// comparison and disagrees at the percent level in the Zeeman-dominated
// range, growing with B.
enum class BreitRabiVariant { GJmuB_GImuN, GImuB_GJmuN };

// Closed-form eigenenergy for I = 1/2, Q = 0:
//   E = -E_HF/(2(2J+1)) + gJ muB B mF +- (E_HF/2) sqrt(1 - 4 mF x/(2J+1) + x^2)
// with E_HF = A(J+1/2) (signed) and x = (gJ muB + gI muN) B / E_HF.
// branch +1 is the manifold that connects to F = J+1/2 at B = 0.  For
// stretched |m_F| = I+J only branch +1 exists (exactly linear in B); the
// discriminant is then evaluated in its signed square-root form, so the
// branch-merge kink of the naive sqrt does not occur.
// Throws NotApplicable for I != 1/2 or Q != 0, and for branch -1 on a
// stretched state.
double breit_rabi_energy(const LevelParams& level, HalfInt I, double B_T,
                         HalfInt m_F, int branch,
                         BreitRabiVariant variant = BreitRabiVariant::GJmuB_GImuN);

struct ZeemanDiagram {
    std::string species, term;
    std::vector<double> B_T;            // grid, ascending
    std::vector<StateLabel> states;     // one per curve, (m_I, m_J) adiabatic
    Eigen::MatrixXd energies_MHz;       // n_points x n_states, column per curve
};

// Diagonalizes at each grid point (parallel over points), then assigns
// adiabatic labels by maximum-overlap propagation from the highest field
// down, seeded with the dominant-component labels there.  Matching is
// restricted to equal m_F (same-m_F curves never cross; different ones may).
// Throws LabelAmbiguity when the best overlap drops below 0.5.
ZeemanDiagram zeeman_sweep(const SpeciesParams& sp, const std::string& term,
                           double B_min_T, double B_max_T, int n_points,
                           ExecPolicy policy = ExecPolicy::Parallel);

ExpansionCoefficients expansion_coefficients(const EigenSystem& es, int state_index);
ExpansionCoefficients expansion_coefficients(const EigenSystem& es, StateLabel label);

// E(a) - E(b), signed, by adiabatic product label.
double splitting(const EigenSystem& es, StateLabel a, StateLabel b);

// CSV: header B_T,label_mI,label_mJ,energy_MHz, one row per (point, state),
// energies in 12-significant-digit scientific notation.
void write_csv(const ZeemanDiagram& zd, std::ostream& out);
std::string to_json(const ZeemanDiagram& zd);

}  // namespace spincool
