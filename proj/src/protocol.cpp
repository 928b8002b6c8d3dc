#include "spincool/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "spincool/errors.hpp"
#include "spincool/units.hpp"

namespace spincool {

MinFieldResult find_min_field(const SpeciesParams& sp, const QubitEncoding& enc,
                              double target_F, double B_hi_T) {
    if (!(target_F > 0.0 && target_F < 1.0))
        throw NotApplicable("target fidelity must be in (0, 1)");
    if (B_hi_T <= 0.0) throw NotApplicable("B_hi must be > 0");

    auto F = [&](double B) { return transfer_fidelity(sp, enc, B).fidelity; };

    const double F_hi = F(B_hi_T);
    if (F_hi < target_F)
        throw Unreachable("fidelity at B_hi is below the target");

    MinFieldResult res;

    // walk down geometrically until the target is crossed; the first drop
    // below target gives the bracket of the largest crossing
    double B_above = B_hi_T;
    double B_below = 0.0;
    double F_prev = F_hi;
    for (double B = 0.8 * B_hi_T; B > 1e-6 * B_hi_T; B *= 0.8) {
        const double f = F(B);
        if (f > F_prev + 1e-12) res.nonmonotone = true;
        F_prev = f;
        if (f < target_F) {
            B_below = B;
            break;
        }
        B_above = B;
    }
    if (B_below == 0.0) {
        // never dropped below target within six decades; report the bottom
        res.B_T = B_above;
        return res;
    }

    while ((B_above - B_below) > 1e-4 * B_above) {
        const double mid = 0.5 * (B_above + B_below);
        if (F(mid) >= target_F) B_above = mid;
        else B_below = mid;
    }
    res.B_T = B_above;
    return res;
}

namespace {

ResolvabilityEntry entry(std::string name, double split_MHz, double linewidth_MHz,
                         double threshold) {
    ResolvabilityEntry e;
    e.transition = std::move(name);
    e.splitting_MHz = split_MHz;
    e.linewidth_MHz = linewidth_MHz;
    e.resolvable = std::abs(split_MHz) / linewidth_MHz >= threshold;
    return e;
}

}  // namespace

ResolvabilityReport readout_report(const SpeciesParams& sp, double B_T, double threshold) {
    const LevelParams& p1 = sp.level("1P1");
    const LevelParams& gs = sp.level("1S0");
    const double Gamma = p1.gamma_MHz;

    ResolvabilityReport rep;
    rep.species = sp.name;
    rep.B_T = B_T;
    rep.threshold = threshold;

    // ground manifold: pure nuclear Zeeman ladder
    const double ground_step =
        gs.g_I * constants::mu_N_over_h_MHz_per_T * B_T;  // E(m) - E(m+1)
    if (sp.I.twice() == 1) {
        rep.entries.push_back(entry("ground qubit m_I=+1/2 <-> m_I=-1/2",
                                    std::abs(ground_step), Gamma, threshold));
    } else {
        rep.entries.push_back(entry("ground neighbor m_I <-> m_I-1",
                                    std::abs(ground_step), Gamma, threshold));
    }

    // excited 1P1 manifold, grouped by the product-state m_J identity
    const EigenSystem exc = eigensystem_at(p1, sp.I, B_T);
    std::map<int, std::vector<std::pair<HalfInt, double>>> clusters;  // m_J -> (m_I, E)
    for (int i = 0; i < exc.dim(); ++i)
        clusters[exc.labels[i].m_J.twice()].push_back(
            {exc.labels[i].m_I, exc.energies_MHz(i)});
    for (auto& [tmj, states] : clusters) {
        std::sort(states.begin(), states.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        const HalfInt mJ = HalfInt::from_twice(tmj);
        for (std::size_t k = 0; k + 1 < states.size(); ++k) {
            std::ostringstream name;
            name << "1P1 m_J=" << mJ.str() << ": m_I=" << states[k].first.str()
                 << " <-> m_I=" << states[k + 1].first.str();
            rep.entries.push_back(entry(name.str(),
                                        states[k].second - states[k + 1].second,
                                        Gamma, threshold));
        }
        // first-order estimate for I = 1/2: Delta_E = A m_J - g_I mu_N B
        if (sp.I.twice() == 1 && states.size() == 2) {
            const double analytic =
                p1.A_MHz * mJ.value() - p1.g_I * constants::mu_N_over_h_MHz_per_T * B_T;
            rep.entries.push_back(entry("1P1 m_J=" + mJ.str() +
                                            ": m_I pair (first-order A*mJ - gI*muN*B)",
                                        analytic, Gamma, threshold));
        }
    }
    return rep;
}

PairDegeneracyReport pair_degeneracy_audit(const SpeciesParams& sp, double B_min_T,
                                           double B_max_T, int n_points,
                                           ExecPolicy policy) {
    const ZeemanDiagram zd = zeeman_sweep(sp, "1P1", B_min_T, B_max_T, n_points, policy);

    auto curve_index = [&](HalfInt mI) {
        for (std::size_t c = 0; c < zd.states.size(); ++c)
            if (zd.states[c].m_J.twice() == 0 && zd.states[c].m_I == mI)
                return static_cast<int>(c);
        throw NoSuchState("no m_J=0 curve with m_I = " + mI.str());
    };

    PairDegeneracyReport rep;
    rep.species = sp.name;
    rep.B_min_T = B_min_T;
    rep.B_max_T = B_max_T;
    rep.n_points = n_points;

    const int n_pairs = (sp.I.twice() + 1) / 2;
    std::vector<Eigen::VectorXd> centers(n_pairs);
    for (int p = 0; p < n_pairs; ++p) {
        const HalfInt m = HalfInt::from_twice(2 * p + 1);  // 1/2, 3/2, ...
        const int up = curve_index(m);
        const int dn = curve_index(-m);
        PairEntry pe;
        pe.m_I = m;
        pe.max_intra_pair_MHz =
            (zd.energies_MHz.col(up) - zd.energies_MHz.col(dn)).cwiseAbs().maxCoeff();
        centers[p] = 0.5 * (zd.energies_MHz.col(up) + zd.energies_MHz.col(dn));
        rep.pairs.push_back(pe);
    }

    double spread = 0.0;
    for (int k = 0; k < zd.energies_MHz.rows(); ++k) {
        double lo = centers[0](k), hi = centers[0](k);
        for (int p = 1; p < n_pairs; ++p) {
            lo = std::min(lo, centers[p](k));
            hi = std::max(hi, centers[p](k));
        }
        spread = std::max(spread, hi - lo);
    }
    rep.manifold_spread_MHz = spread;

    rep.min_inter_pair_gap_MHz = std::numeric_limits<double>::infinity();
    for (int p = 0; p < n_pairs; ++p) {
        double gap = std::numeric_limits<double>::infinity();
        for (int q = 0; q < n_pairs; ++q) {
            if (q == p) continue;
            gap = std::min(gap, (centers[p] - centers[q]).cwiseAbs().minCoeff());
        }
        if (n_pairs == 1) gap = 0.0;
        rep.pairs[p].min_gap_to_neighbors_MHz = gap;
        rep.min_inter_pair_gap_MHz = std::min(rep.min_inter_pair_gap_MHz, gap);
    }
    if (n_pairs == 1) rep.min_inter_pair_gap_MHz = 0.0;
    return rep;
}

ShelvingPlan shelving_plan(const SpeciesParams& sp, double B_T, HalfInt target_mI,
                           const ShelvingConfig& cfg) {
    if (target_mI.twice() > sp.I.twice() || target_mI.twice() < -sp.I.twice() ||
        (sp.I.twice() - target_mI.twice()) % 2 != 0)
        throw InvalidSpins("target m_I invalid for I = " + sp.I.str());

    const double B_mT = B_T * 1e3;
    auto offset_Hz = [&](HalfInt m) { return cfg.diff_g_Hz_per_mT_per_mI * B_mT * m.value(); };

    const double target_offset = offset_Hz(target_mI);
    double min_sep = std::numeric_limits<double>::infinity();
    for (int t = -sp.I.twice(); t <= sp.I.twice(); t += 2) {
        const HalfInt m = HalfInt::from_twice(t);
        if (m == target_mI) continue;
        min_sep = std::min(min_sep, std::abs(offset_Hz(m) - target_offset));
    }
    if (min_sep < cfg.pulse_bandwidth_Hz)
        throw NotSelective("return transitions separated by " + std::to_string(min_sep) +
                           " Hz, below the pulse bandwidth");

    ShelvingPlan plan;
    plan.species = sp.name;
    plan.B_T = B_T;
    plan.target_mI = target_mI;
    plan.min_spectral_separation_Hz = min_sep;
    plan.steps = {
        {"transfer_all", "1S0 -> 3P0 (robust global pulse)", 0.0},
        {"selective_return", "3P0 -> 1S0 (narrow-band pi pulse)", target_offset},
        {"fluoresce", "1S0 -> 1P1", 0.0},
    };
    return plan;
}

std::vector<PhaseEntry> differential_phase(const SpeciesParams& sp, double B_T,
                                           double t_us, const ShelvingConfig& cfg) {
    std::vector<PhaseEntry> out;
    const double B_mT = B_T * 1e3;
    for (int t = sp.I.twice(); t >= -sp.I.twice(); t -= 2) {
        const HalfInt m = HalfInt::from_twice(t);
        const double dnu_Hz = cfg.diff_g_Hz_per_mT_per_mI * B_mT * m.value();
        double phase = std::fmod(constants::two_pi * dnu_Hz * t_us * 1e-6, constants::two_pi);
        if (phase < 0.0) phase += constants::two_pi;
        PhaseEntry e;
        e.m_I = m;
        e.phase_rad = phase;
        e.correction_rad = (phase == 0.0) ? 0.0 : constants::two_pi - phase;
        out.push_back(e);
    }
    return out;
}

std::string to_json(const ResolvabilityReport& r) {
    nlohmann::ordered_json j;
    j["species"] = r.species;
    j["B_T"] = r.B_T;
    j["threshold"] = r.threshold;
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : r.entries) {
        nlohmann::ordered_json je;
        je["transition"] = e.transition;
        je["splitting_MHz"] = e.splitting_MHz;
        je["linewidth_MHz"] = e.linewidth_MHz;
        je["resolvable"] = e.resolvable;
        j["entries"].push_back(je);
    }
    return j.dump(2);
}

std::string to_text(const ResolvabilityReport& r) {
    std::ostringstream os;
    os << "readout resolvability: " << r.species << " at B = " << r.B_T
       << " T (threshold " << r.threshold << ")\n";
    std::size_t w = 0;
    for (const auto& e : r.entries) w = std::max(w, e.transition.size());
    for (const auto& e : r.entries) {
        os << "  " << e.transition << std::string(w - e.transition.size() + 2, ' ');
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%12.4f MHz  (Gamma %.1f MHz)  %s",
                      e.splitting_MHz, e.linewidth_MHz,
                      e.resolvable ? "resolvable" : "NOT resolvable");
        os << buf << '\n';
    }
    return os.str();
}

std::string to_json(const PairDegeneracyReport& r) {
    nlohmann::ordered_json j;
    j["species"] = r.species;
    j["B_min_T"] = r.B_min_T;
    j["B_max_T"] = r.B_max_T;
    j["n_points"] = r.n_points;
    j["pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : r.pairs) {
        nlohmann::ordered_json jp;
        jp["m_I"] = p.m_I.str();
        jp["max_intra_pair_MHz"] = p.max_intra_pair_MHz;
        jp["min_gap_to_neighbors_MHz"] = p.min_gap_to_neighbors_MHz;
        j["pairs"].push_back(jp);
    }
    j["min_inter_pair_gap_MHz"] = r.min_inter_pair_gap_MHz;
    j["manifold_spread_MHz"] = r.manifold_spread_MHz;
    return j.dump(2);
}

std::string to_text(const PairDegeneracyReport& r) {
    std::ostringstream os;
    os << "m_J=0 pair degeneracy: " << r.species << ", B in [" << r.B_min_T * 1e3 << ", "
       << r.B_max_T * 1e3 << "] mT, " << r.n_points << " points\n";
    for (const auto& p : r.pairs) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "  pair +-%-4s  max intra-pair %8.4f MHz   nearest pair %8.4f MHz\n",
                      p.m_I.str().c_str(), p.max_intra_pair_MHz,
                      p.min_gap_to_neighbors_MHz);
        os << buf;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "  min inter-pair gap %.4f MHz, manifold spread %.4f MHz\n",
                  r.min_inter_pair_gap_MHz, r.manifold_spread_MHz);
    os << buf;
    return os.str();
}

std::string to_json(const ShelvingPlan& p) {
    nlohmann::ordered_json j;
    j["species"] = p.species;
    j["B_T"] = p.B_T;
    j["target_mI"] = p.target_mI.str();
    j["min_spectral_separation_Hz"] = p.min_spectral_separation_Hz;
    j["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : p.steps) {
        nlohmann::ordered_json js;
        js["action"] = s.action;
        js["transition"] = s.transition;
        js["offset_MHz"] = s.offset_Hz * 1e-6;
        j["steps"].push_back(js);
    }
    return j.dump(2);
}

std::string to_text(const ShelvingPlan& p) {
    std::ostringstream os;
    os << "shelving plan: " << p.species << " at B = " << p.B_T
       << " T, target m_I = " << p.target_mI.str() << "\n";
    int k = 1;
    for (const auto& s : p.steps) {
        os << "  " << k++ << ". " << s.action << ": " << s.transition;
        if (s.action == "selective_return") os << "  offset " << s.offset_Hz << " Hz";
        os << '\n';
    }
    os << "  min spectral separation " << p.min_spectral_separation_Hz << " Hz\n";
    return os.str();
}

}  // namespace spincool
