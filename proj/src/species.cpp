#include "spincool/species.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spincool/errors.hpp"
#include "spincool/units.hpp"

namespace spincool {

void LevelParams::validate(HalfInt I) const {
    if (gamma_MHz < 0.0) throw InvalidOverride(term + ": gamma must be >= 0");
    if (J.twice() < 0) throw InvalidOverride(term + ": J must be >= 0");
    if (Q_MHz != 0.0 && (I.twice() <= 1 || J.twice() <= 1))
        throw InvalidOverride(term + ": Q must be 0 for I <= 1/2 or J <= 1/2");
    if (clock_linewidth_MHz && *clock_linewidth_MHz < 0.0)
        throw InvalidOverride(term + ": clock linewidth must be >= 0");
}

const LevelParams& SpeciesParams::level(const std::string& term) const {
    auto it = levels.find(term);
    if (it == levels.end()) throw NoSuchState(name + " has no level " + term);
    return it->second;
}

void SpeciesParams::validate() const {
    if (I.twice() < 0) throw InvalidOverride(name + ": I must be >= 0");
    for (const auto& [term, lp] : levels) lp.validate(I);
}

namespace {

// Constant provenance (also dumped by `spincool species --show`):
//   mu_B/h, mu_N/h                 CODATA 2018
//   A(1P1) = -216 MHz (171Yb)      optical hyperfine spectroscopy
//   A(1P1) = -3.4 MHz, Q = +39 MHz (87Sr)  optical hyperfine spectroscopy
//   g_J(1P1) = 1.0                 pure-singlet L=1 estimate (not measured here)
//   g_I(171Yb) = +0.9838           nuclear moment +0.4919 mu_N / I; gives a
//                                  7.50 MHz ground splitting at 1 T
//   g_I(87Sr)  = -0.2430           nuclear moment -1.0936 mu_N / I
//   Gamma(1P1) = 29.1 / 30.2 MHz   1P1 lifetimes 5.5 ns (Yb) / 5.3 ns (Sr)
//   clock linewidths               back-derived from the steady-state
//                                  <n> targets 1e-15 (Yb) / 1e-18 (Sr) at
//                                  omega_v/2pi = 90 / 260 kHz; same order as
//                                  the measured mHz-scale clock lines
//   masses                         AME2020
//   wavelengths                    standard lines: 578/698 nm clock,
//                                  399/461 nm 1S0-1P1, 759/813 nm magic lattice
SpeciesParams make_yb171() {
    SpeciesParams sp;
    sp.name = "yb171";
    sp.I = HalfInt::from_twice(1);
    sp.mass_amu = 170.936330;
    sp.clock_wavelength_nm = 578.42;
    sp.fluorescence_wavelength_nm = 398.91;
    sp.lattice_wavelength_nm = 759.35;
    sp.omega_v_kHz = 90.0;

    LevelParams gs{.term = "1S0", .J = HalfInt(0), .g_I = 0.9838};
    LevelParams clock{.term = "3P0", .J = HalfInt(0), .g_I = 0.9838};
    clock.clock_linewidth_MHz = 5.7e-9;  // 5.7 mHz
    LevelParams p1{.term = "1P1", .J = HalfInt(1), .A_MHz = -216.0,
                   .g_J = 1.0, .g_I = 0.9838, .gamma_MHz = 29.1};
    sp.levels = {{"1S0", gs}, {"3P0", clock}, {"1P1", p1}};
    return sp;
}

SpeciesParams make_sr87() {
    SpeciesParams sp;
    sp.name = "sr87";
    sp.I = HalfInt::from_twice(9);
    sp.mass_amu = 86.908878;
    sp.clock_wavelength_nm = 698.45;
    sp.fluorescence_wavelength_nm = 460.86;
    sp.lattice_wavelength_nm = 813.43;
    sp.omega_v_kHz = 260.0;

    LevelParams gs{.term = "1S0", .J = HalfInt(0), .g_I = -0.2430};
    LevelParams clock{.term = "3P0", .J = HalfInt(0), .g_I = -0.2430};
    clock.clock_linewidth_MHz = 5.2e-10;  // 0.52 mHz
    LevelParams p1{.term = "1P1", .J = HalfInt(1), .A_MHz = -3.4, .Q_MHz = 39.0,
                   .g_J = 1.0, .g_I = -0.2430, .gamma_MHz = 30.2};
    sp.levels = {{"1S0", gs}, {"3P0", clock}, {"1P1", p1}};
    return sp;
}

}  // namespace

SpeciesRegistry::SpeciesRegistry() {
    for (auto sp : {make_yb171(), make_sr87()}) {
        sp.validate();
        species_.emplace(sp.name, std::move(sp));
    }
    // sanity on the shared constants (proton/electron mass ratio)
    const double ratio =
        constants::mu_B_over_h_MHz_per_T / constants::mu_N_over_h_MHz_per_T;
    if (std::abs(ratio / 1836.15 - 1.0) > 1e-4)
        throw InvalidOverride("mu_B/mu_N inconsistent with CODATA");
}

const SpeciesParams& SpeciesRegistry::get(const std::string& name) const {
    auto it = species_.find(name);
    if (it == species_.end()) throw UnknownSpecies("unknown species: " + name);
    return it->second;
}

std::vector<std::string> SpeciesRegistry::list() const {
    std::vector<std::string> names;
    names.reserve(species_.size());
    for (const auto& [name, sp] : species_) names.push_back(name);
    return names;  // std::map iteration is already sorted
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigParse(where + ": not a number: '" + v + "'");
    }
}

}  // namespace

void SpeciesRegistry::load_config_text(const std::string& text, const std::string& origin) {
    // first pass: find the species name; start from the built-in if present
    SpeciesParams sp;
    sp.name = "";
    std::istringstream pre(text);
    std::string line;
    int lineno = 0;
    while (std::getline(pre, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.rfind("name", 0) == 0) {
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigParse(origin + ":" + std::to_string(lineno) + ": missing '='");
            sp.name = trim(t.substr(eq + 1));
            break;
        }
    }
    if (sp.name.empty())
        throw ConfigParse(origin + ": config must set 'name' before other keys");
    if (auto it = species_.find(sp.name); it != species_.end()) sp = it->second;

    std::istringstream in(text);
    lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigParse(where + ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigParse(where + ": empty key or value");

        try {
            if (key == "name") {
                // already handled
            } else if (key == "I") {
                sp.I = HalfInt::parse(val);
            } else if (key == "mass_amu") {
                sp.mass_amu = parse_double(val, where);
            } else if (key == "clock_wavelength_nm") {
                sp.clock_wavelength_nm = parse_double(val, where);
            } else if (key == "fluorescence_wavelength_nm") {
                sp.fluorescence_wavelength_nm = parse_double(val, where);
            } else if (key == "lattice_wavelength_nm") {
                sp.lattice_wavelength_nm = parse_double(val, where);
            } else if (key == "omega_v_kHz") {
                sp.omega_v_kHz = parse_double(val, where);
            } else if (key.rfind("levels.", 0) == 0) {
                std::string rest = key.substr(7);
                auto dot = rest.find('.');
                if (dot == std::string::npos)
                    throw ConfigParse(where + ": expected levels.<term>.<field>");
                std::string term = rest.substr(0, dot);
                std::string field = rest.substr(dot + 1);
                LevelParams& lp = sp.levels[term];
                if (lp.term.empty()) lp.term = term;
                if (field == "J") lp.J = HalfInt::parse(val);
                else if (field == "A_MHz") lp.A_MHz = parse_double(val, where);
                else if (field == "Q_MHz") lp.Q_MHz = parse_double(val, where);
                else if (field == "g_J") lp.g_J = parse_double(val, where);
                else if (field == "g_I") lp.g_I = parse_double(val, where);
                else if (field == "gamma_MHz") lp.gamma_MHz = parse_double(val, where);
                else if (field == "clock_linewidth_MHz")
                    lp.clock_linewidth_MHz = parse_double(val, where);
                else throw ConfigParse(where + ": unknown level field '" + field + "'");
            } else {
                throw ConfigParse(where + ": unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigParse(where + ": " + e.what());
        }
    }

    try {
        sp.validate();
    } catch (const Error& e) {
        throw InvalidOverride(origin + ": " + e.what());
    }
    species_[sp.name] = sp;

    // fold bytes into the running hash
    std::uint64_t h = any_config_ ? std::stoull(config_hash_, nullptr, 16) : 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    config_hash_ = os.str();
    any_config_ = true;
}

void SpeciesRegistry::load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigParse("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    load_config_text(buf.str(), path);
}

void SpeciesRegistry::load_config_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigParse("not a config directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".cfg") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) load_config(f);
}

std::string SpeciesRegistry::serialize(const SpeciesParams& sp) {
    std::ostringstream os;
    os.precision(17);
    os << "name = " << sp.name << "\n";
    os << "I = " << sp.I.str() << "\n";
    os << "mass_amu = " << sp.mass_amu << "\n";
    os << "clock_wavelength_nm = " << sp.clock_wavelength_nm << "\n";
    os << "fluorescence_wavelength_nm = " << sp.fluorescence_wavelength_nm << "\n";
    os << "lattice_wavelength_nm = " << sp.lattice_wavelength_nm << "\n";
    os << "omega_v_kHz = " << sp.omega_v_kHz << "\n";
    for (const auto& [term, lp] : sp.levels) {
        const std::string p = "levels." + term + ".";
        os << p << "J = " << lp.J.str() << "\n";
        os << p << "A_MHz = " << lp.A_MHz << "\n";
        os << p << "Q_MHz = " << lp.Q_MHz << "\n";
        os << p << "g_J = " << lp.g_J << "\n";
        os << p << "g_I = " << lp.g_I << "\n";
        os << p << "gamma_MHz = " << lp.gamma_MHz << "\n";
        if (lp.clock_linewidth_MHz)
            os << p << "clock_linewidth_MHz = " << *lp.clock_linewidth_MHz << "\n";
    }
    return os.str();
}

namespace {

std::string provenance_of(const std::string& species, const std::string& key) {
    // built-in defaults only; overridden values come from the user's config
    static const std::map<std::string, std::string> common = {
        {"I", "nuclear spin of the isotope"},
        {"mass_amu", "AME2020 atomic mass"},
        {"clock_wavelength_nm", "1S0-3P0 clock line"},
        {"fluorescence_wavelength_nm", "1S0-1P1 line (recycle recoil)"},
        {"lattice_wavelength_nm", "magic-wavelength lattice"},
        {"omega_v_kHz", "realized 1D-lattice trap frequency"},
        {"levels.1P1.A_MHz", "optical hyperfine spectroscopy"},
        {"levels.1P1.Q_MHz", "optical hyperfine spectroscopy"},
        {"levels.1P1.g_J", "pure-singlet L=1 estimate"},
        {"levels.1P1.gamma_MHz", "1P1 lifetime"},
        {"levels.3P0.clock_linewidth_MHz",
         "back-derived from the steady-state <n> target; mHz scale as measured"},
    };
    if (key.size() > 4 && key.substr(key.size() - 4) == ".g_I")
        return species == "yb171"
                   ? "nuclear moment +0.4919 mu_N / I (7.50 MHz ground splitting at 1 T)"
                   : "nuclear moment over I";
    auto it = common.find(key);
    if (it != common.end()) return it->second;
    return "";
}

}  // namespace

std::string SpeciesRegistry::describe(const SpeciesParams& sp) {
    std::vector<std::pair<std::string, std::string>> rows;
    std::istringstream in(serialize(sp));
    std::string line;
    std::size_t keyw = 0, valw = 0;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        // compact numbers for display; serialize() keeps full precision
        try {
            std::size_t pos = 0;
            const double d = std::stod(val, &pos);
            if (pos == val.size()) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.10g", d);
                val = buf;
            }
        } catch (const std::exception&) {
        }
        keyw = std::max(keyw, key.size());
        valw = std::max(valw, val.size());
        rows.push_back({key, val});
    }
    std::ostringstream os;
    os << "constants for " << sp.name << " (override via --species-config)\n";
    for (const auto& [key, val] : rows) {
        if (key == "name") continue;
        os << "  " << key << std::string(keyw - key.size() + 2, ' ') << val;
        const std::string src = provenance_of(sp.name, key);
        if (!src.empty()) os << std::string(valw - val.size() + 2, ' ') << "# " << src;
        os << '\n';
    }
    return os.str();
}

std::string SpeciesRegistry::config_hash() const { return config_hash_; }

}  // namespace spincool
