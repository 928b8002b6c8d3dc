#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spincool/decay.hpp"

namespace spincool {

struct MinFieldResult {
    double B_T = 0.0;
    bool nonmonotone = false;  // the fidelity was not monotone while bracketing;
                               // B_T is then the largest crossing of the target
};

// Smallest field in the asymptotic (monotone) region with F >= target, found
// by a downward scan from B_hi followed by bisection, resolved to 3
// significant figures.  Throws Unreachable when F(B_hi) < target.
MinFieldResult find_min_field(const SpeciesParams& sp, const QubitEncoding& enc,
                              double target_F, double B_hi_T);

struct ResolvabilityEntry {
    std::string transition;
    double splitting_MHz = 0.0;
    double linewidth_MHz = 0.0;
    bool resolvable = false;  // |splitting| / linewidth >= threshold
};

struct ResolvabilityReport {
    std::string species;
    double B_T = 0.0;
    double threshold = 3.0;
    std::vector<ResolvabilityEntry> entries;
};

// Readout planning numbers at a field: the ground qubit splitting, the
// intra-cluster excited splittings per m_J, and (for I = 1/2) the
// first-order estimate Delta_E = |A m_J - g_I mu_N B| next to the full
// diagonalization value.
ResolvabilityReport readout_report(const SpeciesParams& sp, double B_T,
                                   double threshold = 3.0);

struct PairEntry {
    HalfInt m_I;                       // pair +-m_I
    double max_intra_pair_MHz = 0.0;   // max |E(+m) - E(-m)| over the grid
    double min_gap_to_neighbors_MHz = 0.0;
};

struct PairDegeneracyReport {
    std::string species;
    double B_min_T = 0.0, B_max_T = 0.0;
    int n_points = 0;
    std::vector<PairEntry> pairs;      // m_I = 1/2 ... I
    double min_inter_pair_gap_MHz = 0.0;
    double manifold_spread_MHz = 0.0;  // max pair-center distance over the grid
};

// Audits the m_J = 0 branch: intra-pair +-m_I splittings and gaps between
// pair centers, over [B_min, B_max] (defaults 50-120 mT).
PairDegeneracyReport pair_degeneracy_audit(const SpeciesParams& sp,
                                           double B_min_T = 0.050,
                                           double B_max_T = 0.120,
                                           int n_points = 29,
                                           ExecPolicy policy = ExecPolicy::Parallel);

struct ShelvingConfig {
    // measured clock-transition differential Zeeman coefficient for 87Sr
    // (Boyd et al., PRA 76, 022510): about -108.4 Hz/mT per m_I.  Imported,
    // not derived here; override for other species or refined values.
    double diff_g_Hz_per_mT_per_mI = -108.4;
    double pulse_bandwidth_Hz = 10.0;
};

struct ShelvingStep {
    std::string action;      // "transfer_all" | "selective_return" | "fluoresce"
    std::string transition;
    double offset_Hz = 0.0;  // selective-pulse frequency offset
};

struct ShelvingPlan {
    std::string species;
    double B_T = 0.0;
    HalfInt target_mI;
    std::vector<ShelvingStep> steps;
    double min_spectral_separation_Hz = 0.0;
};

// Shelve-and-activate readout: transfer everything to the clock state, then
// selectively return the target m_I with a narrow pi pulse and fluoresce.
// Throws NotSelective when another return transition falls within the pulse
// bandwidth of the target offset.
ShelvingPlan shelving_plan(const SpeciesParams& sp, double B_T, HalfInt target_mI,
                           const ShelvingConfig& cfg = {});

struct PhaseEntry {
    HalfInt m_I;
    double phase_rad = 0.0;       // accumulated, mod 2pi
    double correction_rad = 0.0;  // inverse rotation
};

// Differential clock-state phases 2pi * dnu(m_I) * t and their inverses;
// linear in t, so the stated reversal is exact.
std::vector<PhaseEntry> differential_phase(const SpeciesParams& sp, double B_T,
                                           double t_us, const ShelvingConfig& cfg = {});

std::string to_json(const ResolvabilityReport& r);
std::string to_text(const ResolvabilityReport& r);
std::string to_json(const PairDegeneracyReport& r);
std::string to_text(const PairDegeneracyReport& r);
std::string to_json(const ShelvingPlan& p);
std::string to_text(const ShelvingPlan& p);

}  // namespace spincool
