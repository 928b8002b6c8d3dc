// spincool: hyperfine/Zeeman structure, spontaneous-emission coherence
// transfer, and sideband-cooling planning for group-II-like atoms.
// Every subcommand writes CSV/JSON plus a sibling .manifest.json; identical
// flags + config + seed give byte-identical data files.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spincool/cooling.hpp"
#include "spincool/csvio.hpp"
#include "spincool/decay.hpp"
#include "spincool/errors.hpp"
#include "spincool/parallel.hpp"
#include "spincool/protocol.hpp"
#include "spincool/species.hpp"
#include "spincool/structure.hpp"
#include "spincool/units.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace spincool;

struct GlobalOpts {
    std::vector<std::string> config_files;
    int threads = 0;
    std::string command_line;
};

SpeciesRegistry make_registry(const GlobalOpts& g) {
    SpeciesRegistry reg;
    if (const char* dir = std::getenv("SPINCOOL_SPECIES_PATH"))
        reg.load_config_dir(dir);
    for (const auto& f : g.config_files) reg.load_config(f);
    return reg;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::ordered_json manifest(const GlobalOpts& g, const SpeciesRegistry& reg,
                                const SpeciesParams* sp, long long seed) {
    nlohmann::ordered_json m;
    m["command_line"] = g.command_line;
    m["species_config_hash"] = reg.config_hash();
    nlohmann::ordered_json consts;
    consts["mu_B_over_h_MHz_per_T"] = constants::mu_B_over_h_MHz_per_T;
    consts["mu_N_over_h_MHz_per_T"] = constants::mu_N_over_h_MHz_per_T;
    if (sp) consts["species"] = SpeciesRegistry::serialize(*sp);
    m["constants"] = consts;
    m["seed"] = seed;
    m["tool_version"] = kVersion;
    m["timestamp"] = timestamp_utc();
    return m;
}

// --out - : data to stdout, manifest to stderr
void emit(const std::string& out_path, const std::string& data,
          const nlohmann::ordered_json& man) {
    if (out_path == "-") {
        std::cout << data;
        std::cerr << man.dump(2) << "\n";
        return;
    }
    {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::ios_base::failure("cannot open " + out_path);
        f << data;
        if (!f.good()) throw std::ios_base::failure("write failed: " + out_path);
    }
    std::ofstream mf(out_path + ".manifest.json", std::ios::binary);
    if (!mf) throw std::ios_base::failure("cannot open " + out_path + ".manifest.json");
    mf << man.dump(2) << "\n";
}

void emit_plotscript(const std::string& out_path, const std::string& kind) {
    if (out_path == "-") return;
    std::ofstream f(out_path + ".gnuplot");
    if (!f) throw std::ios_base::failure("cannot open " + out_path + ".gnuplot");
    f << "set datafile separator ','\nset key autotitle columnhead\n";
    if (kind == "zeeman") {
        f << "set xlabel 'B (T)'\nset ylabel 'E/h (MHz)'\n"
          << "plot '" << out_path << "' using 1:4 with dots notitle\n";
    } else if (kind == "fidelity") {
        f << "set xlabel 'B (T)'\nset ylabel 'fidelity'\n"
          << "plot '" << out_path << "' using 1:2 with lines\n";
    } else if (kind == "cool") {
        f << "set xlabel 'cycle'\nset ylabel '<n>'\n"
          << "plot '" << out_path << "' using 1:2 with linespoints\n";
    }
}

QubitEncoding parse_qubit(const SpeciesParams& sp, const std::string& text) {
    std::string body = text;
    if (body.rfind("pair:", 0) == 0) body = body.substr(5);
    const HalfInt m = HalfInt::parse(body);
    if (m.twice() <= 0)
        throw CLI::ValidationError("--qubit", "qubit projection must be positive");
    (void)sp;
    return QubitEncoding{m, -m};
}

int run(int argc, char** argv) {
    CLI::App app{"desk-scale structure and coherence-preserving cooling calculations "
                 "for group-II-like atoms (171Yb, 87Sr)"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    {
        std::ostringstream os;
        for (int i = 0; i < argc; ++i) os << (i ? " " : "") << argv[i];
        g.command_line = os.str();
    }
    app.add_option("--species-config", g.config_files,
                   "species config file(s), key = value lines");
    app.add_option("--threads", g.threads, "cap the OpenMP worker pool");

    // ---- zeeman ----
    auto* zee = app.add_subcommand("zeeman", "Zeeman diagram of a level over a field range");
    std::string z_species = "yb171", z_level = "1P1", z_out = "zeeman.csv";
    double z_bmin = 0.0, z_bmax = 2.0;
    int z_points = 200;
    bool z_json = false, z_serial = false, z_plot = false;
    zee->add_option("--species", z_species)->required();
    zee->add_option("--level", z_level, "term label (default 1P1)");
    zee->add_option("--bmin", z_bmin, "T")->required();
    zee->add_option("--bmax", z_bmax, "T")->required();
    zee->add_option("--points", z_points)->required()->check(CLI::Range(2, 1000000));
    zee->add_option("--out", z_out, "output CSV path or -");
    zee->add_flag("--json", z_json, "write JSON instead of CSV");
    zee->add_flag("--serial", z_serial, "serial reference sweep");
    zee->add_flag("--emit-plotscript", z_plot);

    // ---- fidelity ----
    auto* fid = app.add_subcommand("fidelity",
                                   "coherence-transfer fidelity curve F(B)");
    std::string f_species = "yb171", f_qubit = "1/2", f_out = "fidelity.csv",
                f_mode = "algebraic";
    double f_bmin = 0.0, f_bmax = 2.0;
    int f_points = 100;
    bool f_serial = false, f_plot = false;
    fid->add_option("--species", f_species)->required();
    fid->add_option("--qubit", f_qubit,
                    "m (e.g. 1/2) for (+m,-m), or pair:m for the +-m pair encoding")
        ->required();
    fid->add_option("--bmin", f_bmin)->required();
    fid->add_option("--bmax", f_bmax)->required();
    fid->add_option("--points", f_points)->required()->check(CLI::Range(1, 1000000));
    fid->add_option("--mode", f_mode)->check(CLI::IsMember({"algebraic", "master-equation"}));
    fid->add_option("--out", f_out);
    fid->add_flag("--serial", f_serial);
    fid->add_flag("--emit-plotscript", f_plot);

    // ---- cool ----
    auto* cool = app.add_subcommand("cool", "discrete sideband-cooling cycles");
    std::string c_species = "sr87", c_out = "cool.csv", c_method = "rate";
    double c_omega = 0.0, c_gamma_clock = -1.0, c_nbar = 2.0, c_pulse = 100.0,
           c_quench = 1.0, c_recoil = 0.0;
    int c_cycles = 50, c_nmax = 0;
    long long c_seed = 1, c_samples = 200000;
    bool c_serial = false, c_plot = false;
    cool->add_option("--species", c_species)->required();
    cool->add_option("--omega", c_omega, "trap frequency omega_v/2pi in kHz");
    cool->add_option("--gamma-clock", c_gamma_clock, "clock linewidth gamma/2pi in Hz");
    cool->add_option("--cycles", c_cycles)->check(CLI::Range(1, 100000));
    cool->add_option("--nbar", c_nbar, "initial thermal mean occupation");
    cool->add_option("--nmax", c_nmax, "ladder truncation (0 = auto)");
    cool->add_option("--pulse-time", c_pulse, "us");
    cool->add_option("--quench-rate", c_quench, "MHz");
    cool->add_option("--recoil-lambda", c_recoil,
                     "recycle recoil wavelength nm (0 = species default)");
    cool->add_option("--method", c_method)->check(CLI::IsMember({"rate", "mc"}));
    cool->add_option("--seed", c_seed, "Monte-Carlo seed");
    cool->add_option("--samples", c_samples, "Monte-Carlo sample count");
    cool->add_option("--out", c_out);
    cool->add_flag("--serial", c_serial);
    cool->add_flag("--emit-plotscript", c_plot);

    // ---- find-field ----
    auto* ff = app.add_subcommand("find-field",
                                  "minimum field reaching a target fidelity");
    std::string ff_species = "yb171", ff_qubit = "1/2";
    double ff_target = 0.99, ff_bhi = 5.0;
    ff->add_option("--species", ff_species)->required();
    ff->add_option("--qubit", ff_qubit)->required();
    ff->add_option("--target", ff_target)->required()->check(CLI::Range(1e-6, 0.999999));
    ff->add_option("--bhi", ff_bhi, "upper bracket in T");

    // ---- report ----
    auto* rep = app.add_subcommand("report", "readout / pair-degeneracy / shelving reports");
    std::string r_kind, r_species = "yb171", r_out, r_target_mi = "9/2";
    double r_b = 1.0, r_bmin = 0.050, r_bmax = 0.120, r_diffg = -108.4,
           r_bandwidth = 10.0, r_threshold = 3.0;
    int r_points = 29;
    rep->add_option("--kind", r_kind)->required()
        ->check(CLI::IsMember({"readout", "pairs", "shelving"}));
    rep->add_option("--species", r_species)->required();
    rep->add_option("--b", r_b, "field in T (readout, shelving)");
    rep->add_option("--bmin", r_bmin, "pairs sweep start, T");
    rep->add_option("--bmax", r_bmax, "pairs sweep end, T");
    rep->add_option("--points", r_points);
    rep->add_option("--target-mi", r_target_mi, "shelving target m_I");
    rep->add_option("--diff-g", r_diffg, "clock differential Zeeman, Hz/mT per m_I");
    rep->add_option("--bandwidth", r_bandwidth, "selective pulse bandwidth, Hz");
    rep->add_option("--threshold", r_threshold, "resolvability threshold");
    rep->add_option("--out", r_out, "write JSON here (text always on stdout)");

    // ---- species ----
    auto* spc = app.add_subcommand("species", "registry inspection");
    std::string s_show;
    bool s_list = false;
    spc->add_option("--show", s_show, "dump one species with provenance");
    spc->add_flag("--list", s_list);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints usage/help text
        return code == 0 ? 0 : 2;
    }
    set_worker_cap(g.threads);

    const SpeciesRegistry reg = make_registry(g);

    if (zee->parsed()) {
        const auto& sp = reg.get(z_species);
        auto zd = zeeman_sweep(sp, z_level, z_bmin, z_bmax, z_points,
                               z_serial ? ExecPolicy::Serial : ExecPolicy::Parallel);
        std::string data;
        if (z_json) {
            data = to_json(zd) + "\n";
        } else {
            std::ostringstream os;
            write_csv(zd, os);
            data = os.str();
        }
        emit(z_out, data, manifest(g, reg, &sp, 0));
        if (z_plot) emit_plotscript(z_out, "zeeman");
        return 0;
    }

    if (fid->parsed()) {
        const auto& sp = reg.get(f_species);
        const QubitEncoding enc = parse_qubit(sp, f_qubit);
        auto curve = fidelity_sweep(sp, enc, f_bmin, f_bmax, f_points,
                                    f_serial ? ExecPolicy::Serial : ExecPolicy::Parallel);
        std::ostringstream os;
        if (f_mode == "master-equation") {
            // cross-check column: algebraic vs full Lindblad extraction
            os << "B_T,fidelity,Gamma_prime_MHz,delta_MHz,purity,"
                  "fidelity_master_equation,cross_check_delta\n";
            for (const auto& p : curve.points) {
                const double fme = fidelity_via_master_equation(sp, enc, p.B_T);
                os << csv::num(p.B_T) << ',' << csv::num(p.fidelity) << ','
                   << csv::num(p.Gamma_prime_MHz) << ',' << csv::num(p.delta_MHz) << ','
                   << csv::num(p.purity) << ',' << csv::num(fme) << ','
                   << csv::num(fme - p.fidelity) << '\n';
            }
        } else {
            write_csv(curve, os);
        }
        emit(f_out, os.str(), manifest(g, reg, &sp, 0));
        if (f_plot) emit_plotscript(f_out, "fidelity");
        return 0;
    }

    if (cool->parsed()) {
        const auto& sp = reg.get(c_species);
        CoolingParams p;
        p.trap.omega_v_kHz = (c_omega > 0.0) ? c_omega : sp.omega_v_kHz;
        p.trap.mass_amu = sp.mass_amu;
        p.trap.lattice_wavelength_nm = sp.lattice_wavelength_nm;
        p.recycle_wavelength_nm =
            (c_recoil > 0.0) ? c_recoil : sp.fluorescence_wavelength_nm;
        const auto& clock = sp.level("3P0");
        p.gamma_clock_Hz = (c_gamma_clock >= 0.0)
                               ? c_gamma_clock
                               : (clock.clock_linewidth_MHz ? *clock.clock_linewidth_MHz * 1e6
                                                            : 0.0);
        p.quench_rate_MHz = c_quench;
        p.pulse_time_us = c_pulse;
        if (c_nmax > 0) {
            p.n_max = c_nmax;
        } else {
            // auto: thermal tail below 1e-8 at the truncation level
            p.n_max = 10;
            double tail = 1.0;
            while (p.n_max < 400) {
                thermal_distribution(c_nbar, p.n_max, &tail);
                if (tail < 1e-8) break;
                ++p.n_max;
            }
        }
        if (!resolved_sideband_regime(p.gamma_clock_Hz, p.trap.omega_v_kHz))
            std::cerr << "warning: gamma_clock is not far below omega_v; "
                         "sidebands are not well resolved\n";
        const auto n0 = thermal_distribution(c_nbar, p.n_max);
        CoolingTrajectory traj;
        if (c_method == "mc")
            traj = mc_cooling(p, n0, c_cycles, static_cast<std::uint64_t>(c_seed),
                              c_samples,
                              c_serial ? ExecPolicy::Serial : ExecPolicy::Parallel);
        else
            traj = simulate_cooling(p, n0, c_cycles);
        std::ostringstream os;
        write_csv(traj, os);
        emit(c_out, os.str(), manifest(g, reg, &sp, c_seed));
        if (c_plot) emit_plotscript(c_out, "cool");
        return 0;
    }

    if (ff->parsed()) {
        const auto& sp = reg.get(ff_species);
        const QubitEncoding enc = parse_qubit(sp, ff_qubit);
        const MinFieldResult res = find_min_field(sp, enc, ff_target, ff_bhi);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3g", res.B_T);
        std::cout << buf << "\n";
        if (res.nonmonotone)
            std::cerr << "note: fidelity not monotone below the crossing; "
                         "reported the largest crossing\n";
        return 0;
    }

    if (rep->parsed()) {
        const auto& sp = reg.get(r_species);
        std::string text, json;
        if (r_kind == "readout") {
            auto r = readout_report(sp, r_b, r_threshold);
            text = to_text(r);
            json = to_json(r);
        } else if (r_kind == "pairs") {
            auto r = pair_degeneracy_audit(sp, r_bmin, r_bmax, r_points);
            text = to_text(r);
            json = to_json(r);
        } else {
            ShelvingConfig cfg;
            cfg.diff_g_Hz_per_mT_per_mI = r_diffg;
            cfg.pulse_bandwidth_Hz = r_bandwidth;
            auto plan = shelving_plan(sp, r_b, HalfInt::parse(r_target_mi), cfg);
            text = to_text(plan);
            json = to_json(plan);
        }
        std::cout << text;
        if (!r_out.empty()) emit(r_out, json + "\n", manifest(g, reg, &sp, 0));
        return 0;
    }

    if (spc->parsed()) {
        if (s_list || s_show.empty()) {
            for (const auto& n : reg.list()) std::cout << n << "\n";
            return 0;
        }
        const auto& sp = reg.get(s_show);
        std::cout << SpeciesRegistry::describe(sp);
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const spincool::Error& e) {
        std::cerr << e.name() << ": " << e.what() << "\n";
        return 3;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
