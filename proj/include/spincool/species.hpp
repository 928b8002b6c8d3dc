#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spincool/halfint.hpp"

namespace spincool {

// One electronic level's constants, E/h in MHz.  Signs are stored so that
// the structure-module Hamiltonian
//     H = A I.J + Q T_quad + gJ muB B Jz - gI muN B Iz
// holds as written, with no hidden flips.
struct LevelParams {
    std::string term;          // "1S0", "3P0", "1P1"
    HalfInt J;
    double A_MHz = 0.0;        // magnetic hyperfine constant
    double Q_MHz = 0.0;        // electric quadrupole constant; 0 unless I,J > 1/2
    double g_J = 0.0;
    double g_I = 0.0;
    double gamma_MHz = 0.0;    // natural linewidth Gamma/2pi
    std::optional<double> clock_linewidth_MHz;  // gamma/2pi of the clock line

    void validate(HalfInt I) const;  // throws InvalidOverride
};

struct SpeciesParams {
    std::string name;
    HalfInt I;
    std::map<std::string, LevelParams> levels;  // keyed by term

    // auxiliary constants used by the cooling/protocol planners
    double mass_amu = 0.0;
    double clock_wavelength_nm = 0.0;        // 1S0 -> 3P0
    double fluorescence_wavelength_nm = 0.0; // 1P1 -> 1S0 (recycle recoil)
    double lattice_wavelength_nm = 0.0;
    double omega_v_kHz = 0.0;                // typical realized trap frequency

    const LevelParams& level(const std::string& term) const;  // throws NoSuchState
    void validate() const;
};

// Immutable after construction; concurrent reads are safe.
class SpeciesRegistry {
public:
    // built-ins: yb171, sr87 (see src/species.cpp for constant provenance)
    SpeciesRegistry();

    const SpeciesParams& get(const std::string& name) const;  // throws UnknownSpecies
    std::vector<std::string> list() const;                    // sorted

    // Flat key-value config, one species per file:
    //     name = ca43
    //     I = 7/2
    //     mass_amu = 42.96
    //     levels.1P1.J = 1
    //     levels.1P1.A_MHz = -806.4
    // Unknown keys are errors; values override built-ins field by field.
    // Parse errors report the line number.
    void load_config(const std::string& path);
    void load_config_text(const std::string& text, const std::string& origin);

    // Loads every *.cfg in the directory (used for SPINCOOL_SPECIES_PATH).
    void load_config_dir(const std::string& dir);

    // Round-trips through load_config_text.
    static std::string serialize(const SpeciesParams& sp);

    // Aligned key/value/provenance table for human inspection.
    static std::string describe(const SpeciesParams& sp);

    // FNV-1a over all loaded config bytes; "builtin" when none.
    std::string config_hash() const;

private:
    std::map<std::string, SpeciesParams> species_;
    std::string config_hash_ = "builtin";
    bool any_config_ = false;
};

}  // namespace spincool
