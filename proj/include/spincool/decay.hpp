#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "spincool/parallel.hpp"
#include "spincool/structure.hpp"

namespace spincool {

// Combined Hilbert space: the 3(2I+1) excited 1P1 eigenstates followed by
// the (2I+1) ground 1S0 nuclear sublevels.  States are indexed in the
// eigen-order of the two underlying EigenSystems.  Energies are relative to
// each manifold's own hyperfine/Zeeman structure; the optical carrier is
// absorbed into the rotating frame.
struct CombinedBasis {
    std::vector<StateLabel> excited;
    std::vector<HalfInt> ground_mI;

    int n_excited() const { return static_cast<int>(excited.size()); }
    int n_ground() const { return static_cast<int>(ground_mI.size()); }
    int dim() const { return n_excited() + n_ground(); }
    int ground_index(HalfInt mI) const;  // combined index; throws NoSuchState
};

struct DensityMatrixTols {
    double hermiticity = 1e-10;
    double trace = 1e-9;
    double positivity = 1e-9;  // smallest eigenvalue >= -positivity
};

struct DensityMatrix {
    Eigen::MatrixXcd rho;
    CombinedBasis basis;  // may be empty for synthetic systems

    double trace_error() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;
    void validate(const DensityMatrixTols& tols = {}) const;  // throws NotApplicable
};

// L_q = sqrt(Gamma) sum over excited eigenstates of c_q |g, m_I = m_F - q><e|.
// Stored in ordinary-frequency normalization: sum_q Lq^dag Lq equals
// Gamma_MHz times the excited-manifold projector.  The dynamical code
// multiplies the dissipator by 2pi when integrating.
struct JumpOperatorSet {
    std::array<Eigen::MatrixXd, 3> L;  // q = -1, 0, +1 at index q+1
    double Gamma_MHz = 0.0;
    CombinedBasis basis;

    const Eigen::MatrixXd& q(int q_) const { return L[q_ + 1]; }
};

// Builds the polarization-resolved jump operators from the two eigensystems
// at a common field.  Throws DimensionMismatch if the nuclear spins differ.
JumpOperatorSet jump_operators(const EigenSystem& excited, const EigenSystem& ground,
                               double Gamma_MHz);

// diag(excited energies..., ground energies...) in MHz on the combined basis
Eigen::VectorXd combined_energies(const EigenSystem& excited, const EigenSystem& ground);

struct EvolveOptions {
    double rtol = 1e-10;  // per accepted step
    double atol = 1e-12;
};

struct StepRecord {
    double t_us;
    double h_us;
    const Eigen::MatrixXcd& rho;  // lab frame
};
using StepObserver = std::function<void(const StepRecord&)>;

// Propagates the Lindblad master equation
//   drho/dt = -i[H, rho] - 1/2 sum_q (Lq^dag Lq rho + rho Lq^dag Lq - 2 Lq rho Lq^dag)
// for t_us with an embedded Dormand-Prince 5(4) pair, adaptive step <= dt_max.
// Internally the Hamiltonian is diagonalized once and the integration runs
// in the interaction picture, so only dissipative frequencies limit the step
// size; fast Bohr phases are applied exactly.  Throws StepFailure when the
// tolerance is unattainable at the minimum step.
DensityMatrix evolve(const DensityMatrix& rho0, const Eigen::MatrixXcd& H_MHz,
                     const JumpOperatorSet& jumps, double t_us, double dt_max_us,
                     const EvolveOptions& opts = {}, const StepObserver& observer = {});

// Independent cross-check path: builds the full N^2 x N^2 Liouvillian and
// applies its matrix exponential.  Intended for dims <= 40.
DensityMatrix superoperator_propagate(const DensityMatrix& rho0,
                                      const Eigen::MatrixXcd& H_MHz,
                                      const JumpOperatorSet& jumps, double t_us);

// Late-time ground coherence after spontaneous transfer:
//   rho_g(t) = rho_e(0) * Gamma'/(Gamma - i delta) * exp(-i Delta_g t)
// (solution of the two-level coherence equations for t >> 1/Gamma; enforced
// t >= 10/Gamma).  All rate/splitting inputs are ordinary MHz and are
// converted to angular frequencies together; the phase rotates at the
// ground-qubit Bohr frequency.
std::complex<double> coherence_closed_form(std::complex<double> rho_e0,
                                           double Gamma_MHz, double Gamma_prime_MHz,
                                           double delta_MHz, double Delta_g_MHz,
                                           double t_us);

// Nuclear qubit encoding: ground projections +-m and the two m_J = 0-branch
// excited states with m_F = m_up, m_down.
struct QubitEncoding {
    HalfInt m_up, m_down;
};

struct TransferResult {
    double B_T = 0.0;
    double Gamma_prime_MHz = 0.0;
    double delta_MHz = 0.0;   // Delta_g - Delta_e
    double fidelity = 0.0;    // Gamma'^2 / (Gamma^2 + delta^2)
    double purity = 0.0;      // min |c_0|^2 of the two excited states
    bool low_purity = false;  // purity < 0.9: branch labels are mixing
};

// Algebraic fidelity from the structure-module coefficients and exact
// eigen-splittings.  The excited state for each m_F is the most
// pi-polarized one in its block (largest |c_0|), i.e. the m_J = 0 branch
// wherever that notion is meaningful; below that regime the result is still
// computed but flagged low_purity.
TransferResult transfer_fidelity(const SpeciesParams& sp, const QubitEncoding& enc,
                                 double B_T);

// Same quantity extracted from a full master-equation run: an equal
// superposition of the two excited qubit states is decayed for t = 20/Gamma
// and the ground coherence magnitude ratio is returned.
double fidelity_via_master_equation(const SpeciesParams& sp, const QubitEncoding& enc,
                                    double B_T, const EvolveOptions& opts = {});

struct FidelityCurve {
    std::string species;
    QubitEncoding encoding;
    std::vector<TransferResult> points;
};

FidelityCurve fidelity_sweep(const SpeciesParams& sp, const QubitEncoding& enc,
                             double B_min_T, double B_max_T, int n_points,
                             ExecPolicy policy = ExecPolicy::Parallel);

// CSV header: B_T,fidelity,Gamma_prime_MHz,delta_MHz,purity
void write_csv(const FidelityCurve& fc, std::ostream& out);
std::string to_json(const FidelityCurve& fc);

}  // namespace spincool
