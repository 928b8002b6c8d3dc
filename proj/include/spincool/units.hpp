#pragma once

namespace spincool {

// Unit discipline used throughout:
//   energies are E/h in MHz, magnetic fields in tesla, times in microseconds.
// Linewidths and hyperfine constants are ordinary frequencies (the nu in
// nu = omega/2pi).  Anything that enters an exponent or a rate equation is
// converted to angular frequency in rad/us at the point of use, through
// to_angular() below and nowhere else.
namespace constants {

// CODATA 2018
inline constexpr double mu_B_over_h_MHz_per_T = 13996.245;
inline constexpr double mu_N_over_h_MHz_per_T = 7.622593;
inline constexpr double hbar_J_s = 1.054571817e-34;
inline constexpr double amu_kg = 1.66053906660e-27;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace constants

// MHz (ordinary frequency) -> rad/us (angular frequency).  The only 2*pi
// in the dynamical code paths.
inline constexpr double to_angular(double f_MHz) { return constants::two_pi * f_MHz; }

}  // namespace spincool
