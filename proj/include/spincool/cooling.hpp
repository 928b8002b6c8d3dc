#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spincool/parallel.hpp"

namespace spincool {

struct TrapParams {
    double omega_v_kHz = 0.0;          // vibrational frequency omega_v/2pi
    double lattice_wavelength_nm = 0.0;
    double mass_amu = 0.0;
};

// Whether the red-sideband pi pulse is assumed recalibrated to the level it
// addresses (transfer probability 1) or held at the n = 1 calibration, where
// the sqrt(n) scaling of the sideband coupling turns the pulse area into
// pi*sqrt(n) and the transfer probability into sin^2(pi sqrt(n)/2).
enum class PulseModel { IdealPerLevel, FixedCalibration };

struct CoolingParams {
    TrapParams trap;
    double gamma_clock_Hz = 0.0;    // clock-line gamma/2pi
    double quench_rate_MHz = 1.0;   // effective 3P0 depopulation rate
    int n_max = 20;                 // vibrational ladder truncation
    double pulse_time_us = 100.0;   // red-sideband pi-pulse duration
    double recycle_wavelength_nm = 0.0;  // recoil photon of the recycle decay
    PulseModel pulse_model = PulseModel::IdealPerLevel;
};

struct CoolingTrajectory {
    std::vector<double> times_us;                   // per cycle boundary
    std::vector<std::vector<double>> populations;   // [cycle][n]
    std::vector<double> mean_n;
    double truncation_loss = 0.0;
};

// eta = (2pi/lambda) sqrt(hbar / (2 m omega_v)); omega_v = 2pi * omega_v_kHz
double lamb_dicke(const TrapParams& trap, double transition_wavelength_nm);

// Resolved-sideband limit <n> = gamma^2 / (2 omega_v)^2, both as ordinary
// frequencies.  Scale invariant under common rescaling of gamma and omega.
double steady_state_n(double gamma_clock_Hz, double omega_v_kHz);
bool resolved_sideband_regime(double gamma_clock_Hz, double omega_v_kHz);

// One cooling cycle: a red-sideband pi pulse |n> -> |n-1> on the clock line
// (n = 0 is dark), then quench/recycle back to the ground manifold with one
// recoil branching n -> n+1 / n-1 / n at probabilities eta^2(n+1) / eta^2 n /
// remainder.  The paper-level narrative fixes only this structure; the
// discrete cycle model here is the minimal quantitative reading and is kept
// strictly separate from the analytic steady_state_n limit.
// Branching probabilities are saturated (rescaled to sum 1) where
// eta^2(2n+1) > 1; that region is outside the Lamb-Dicke expansion anyway.
// Throws TruncationOverflow when more than 1e-6 population reaches n_max.
CoolingTrajectory simulate_cooling(const CoolingParams& p,
                                   const std::vector<double>& n0_distribution,
                                   int n_cycles);

// Monte-Carlo trajectory sampler of the identical cycle model; the
// independent check of the deterministic recursion.  Samples are split into
// fixed chunks with per-chunk RNG streams, so results are identical for any
// thread count and reproducible per seed.
CoolingTrajectory mc_cooling(const CoolingParams& p,
                             const std::vector<double>& n0_distribution,
                             int n_cycles, std::uint64_t seed, long long n_samples,
                             ExecPolicy policy = ExecPolicy::Parallel);

// thermal occupation with mean nbar, truncated at n_max and renormalized;
// the pre-truncation tail weight is reported via *tail if given
std::vector<double> thermal_distribution(double nbar, int n_max, double* tail = nullptr);

// CSV: cycle,mean_n,p0,p1,...,p{n_max}
void write_csv(const CoolingTrajectory& ct, std::ostream& out);

}  // namespace spincool
