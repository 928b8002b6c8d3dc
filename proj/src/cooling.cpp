#include "spincool/cooling.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "spincool/csvio.hpp"
#include "spincool/errors.hpp"
#include "spincool/units.hpp"

namespace spincool {

double lamb_dicke(const TrapParams& trap, double transition_wavelength_nm) {
    if (trap.omega_v_kHz <= 0.0 || trap.mass_amu <= 0.0 || transition_wavelength_nm <= 0.0)
        throw NotApplicable("lamb_dicke requires positive trap frequency, mass and wavelength");
    const double k = constants::two_pi / (transition_wavelength_nm * 1e-9);   // 1/m
    const double omega = constants::two_pi * trap.omega_v_kHz * 1e3;          // rad/s
    const double m = trap.mass_amu * constants::amu_kg;
    return k * std::sqrt(constants::hbar_J_s / (2.0 * m * omega));
}

double steady_state_n(double gamma_clock_Hz, double omega_v_kHz) {
    if (omega_v_kHz <= 0.0) throw NotApplicable("omega_v must be > 0");
    const double ratio = gamma_clock_Hz / (2.0 * omega_v_kHz * 1e3);
    return ratio * ratio;
}

bool resolved_sideband_regime(double gamma_clock_Hz, double omega_v_kHz) {
    return gamma_clock_Hz < 0.1 * omega_v_kHz * 1e3;
}

namespace {

struct CycleModel {
    double eta2;                 // recycle-recoil Lamb-Dicke parameter squared
    PulseModel pulse_model;
    int n_max;

    double transfer_probability(int n) const {
        if (n <= 0) return 0.0;  // n = 0 is dark on the red sideband
        if (pulse_model == PulseModel::IdealPerLevel) return 1.0;
        const double s = std::sin(0.5 * constants::pi * std::sqrt(double(n)));
        return s * s;
    }

    // recoil branching from vibrational level n: {down, stay, up}
    void branching(int n, double& down, double& stay, double& up) const {
        up = eta2 * (n + 1.0);
        down = eta2 * n;
        if (up + down > 1.0) {  // outside the Lamb-Dicke expansion; saturate
            const double s = 1.0 / (up + down);
            up *= s;
            down *= s;
        }
        stay = 1.0 - up - down;
    }
};

CycleModel make_model(const CoolingParams& p) {
    if (p.n_max < 5) throw NotApplicable("n_max must be >= 5");
    CycleModel m;
    m.pulse_model = p.pulse_model;
    m.n_max = p.n_max;
    if (p.recycle_wavelength_nm > 0.0) {
        const double eta = lamb_dicke(p.trap, p.recycle_wavelength_nm);
        m.eta2 = eta * eta;
    } else {
        m.eta2 = 0.0;  // recoil-free idealization
    }
    return m;
}

double cycle_time_us(const CoolingParams& p) {
    // pi pulse plus enough quench time to empty the clock state
    const double quench_us = (p.quench_rate_MHz > 0.0)
                                 ? 5.0 / to_angular(p.quench_rate_MHz)
                                 : 0.0;
    return p.pulse_time_us + quench_us;
}

void check_distribution(const std::vector<double>& n0, int n_max) {
    if (static_cast<int>(n0.size()) != n_max + 1)
        throw DimensionMismatch("initial distribution must have n_max + 1 entries");
    double sum = 0.0;
    for (double v : n0) {
        if (v < 0.0) throw NotApplicable("negative occupation in initial distribution");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw NotApplicable("initial distribution must be normalized");
}

}  // namespace

CoolingTrajectory simulate_cooling(const CoolingParams& p,
                                   const std::vector<double>& n0_distribution,
                                   int n_cycles) {
    const CycleModel model = make_model(p);
    check_distribution(n0_distribution, p.n_max);
    const double dt = cycle_time_us(p);

    CoolingTrajectory traj;
    std::vector<double> pop = n0_distribution;
    if (pop[p.n_max] > 1e-6)
        throw TruncationOverflow("initial population at n_max exceeds 1e-6; raise n_max");
    std::vector<double> excited(p.n_max + 1, 0.0);

    auto record = [&](int cycle) {
        traj.times_us.push_back(cycle * dt);
        traj.populations.push_back(pop);
        double m = 0.0;
        for (int n = 0; n <= p.n_max; ++n) m += n * pop[n];
        traj.mean_n.push_back(m);
    };
    record(0);

    for (int cycle = 1; cycle <= n_cycles; ++cycle) {
        // red-sideband pi pulse: |1S0, n> -> |3P0, n-1>
        std::fill(excited.begin(), excited.end(), 0.0);
        for (int n = 1; n <= p.n_max; ++n) {
            const double moved = pop[n] * model.transfer_probability(n);
            excited[n - 1] += moved;
            pop[n] -= moved;
        }
        // quench/recycle with one recoil branching
        for (int n = 0; n <= p.n_max; ++n) {
            const double w = excited[n];
            if (w == 0.0) continue;
            double down, stay, up;
            model.branching(n, down, stay, up);
            if (n > 0) pop[n - 1] += w * down;
            pop[n] += w * stay;
            if (n + 1 <= p.n_max) pop[n + 1] += w * up;
            else traj.truncation_loss += w * up;
        }
        if (pop[p.n_max] > 1e-6 || traj.truncation_loss > 1e-6)
            throw TruncationOverflow("population reached the n_max truncation; raise n_max");
        record(cycle);
    }
    return traj;
}

CoolingTrajectory mc_cooling(const CoolingParams& p,
                             const std::vector<double>& n0_distribution,
                             int n_cycles, std::uint64_t seed, long long n_samples,
                             ExecPolicy policy) {
    const CycleModel model = make_model(p);
    check_distribution(n0_distribution, p.n_max);
    if (n_samples <= 0) throw NotApplicable("need at least one sample");

    // fixed chunking: identical streams for any thread count
    const int n_chunks = 256;
    const long long per_chunk = (n_samples + n_chunks - 1) / n_chunks;

    std::vector<std::vector<double>> chunk_mean_sums(n_chunks,
                                                     std::vector<double>(n_cycles + 1, 0.0));
    std::vector<std::vector<double>> chunk_pop_sums(
        n_chunks, std::vector<double>((n_cycles + 1) * (p.n_max + 1), 0.0));
    std::vector<long long> chunk_counts(n_chunks, 0);

    std::vector<double> cdf(n0_distribution.size());
    std::partial_sum(n0_distribution.begin(), n0_distribution.end(), cdf.begin());

    parallel_for(static_cast<std::size_t>(n_chunks), policy, [&](std::size_t c) {
        const long long begin = c * per_chunk;
        const long long end = std::min<long long>(n_samples, begin + per_chunk);
        if (begin >= end) return;
        std::seed_seq sseq{static_cast<std::uint32_t>(seed),
                           static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(c) + 1u};
        std::mt19937_64 rng(sseq);
        std::uniform_real_distribution<double> uni(0.0, 1.0);

        auto& means = chunk_mean_sums[c];
        auto& pops = chunk_pop_sums[c];
        for (long long s = begin; s < end; ++s) {
            const double u0 = uni(rng);
            int n = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u0) -
                                     cdf.begin());
            if (n > p.n_max) n = p.n_max;
            means[0] += n;
            pops[n] += 1.0;
            for (int cycle = 1; cycle <= n_cycles; ++cycle) {
                if (n > 0 && uni(rng) < model.transfer_probability(n)) {
                    --n;  // in the clock state at level n now
                    double down, stay, up;
                    model.branching(n, down, stay, up);
                    const double u = uni(rng);
                    if (u < up) ++n;
                    else if (u < up + down && n > 0) --n;
                    if (n > p.n_max) n = p.n_max;  // saturate rather than lose the sample
                }
                means[cycle] += n;
                pops[cycle * (p.n_max + 1) + n] += 1.0;
            }
        }
        chunk_counts[c] = end - begin;
    });

    CoolingTrajectory traj;
    const double dt = cycle_time_us(p);
    traj.times_us.resize(n_cycles + 1);
    traj.mean_n.assign(n_cycles + 1, 0.0);
    traj.populations.assign(n_cycles + 1, std::vector<double>(p.n_max + 1, 0.0));
    long long total = 0;
    for (long long c : chunk_counts) total += c;
    for (int c = 0; c < n_chunks; ++c) {
        for (int k = 0; k <= n_cycles; ++k) {
            traj.mean_n[k] += chunk_mean_sums[c][k];
            for (int n = 0; n <= p.n_max; ++n)
                traj.populations[k][n] += chunk_pop_sums[c][k * (p.n_max + 1) + n];
        }
    }
    for (int k = 0; k <= n_cycles; ++k) {
        traj.times_us[k] = k * dt;
        traj.mean_n[k] /= double(total);
        for (auto& v : traj.populations[k]) v /= double(total);
    }
    return traj;
}

std::vector<double> thermal_distribution(double nbar, int n_max, double* tail) {
    if (nbar < 0.0) throw NotApplicable("nbar must be >= 0");
    std::vector<double> p(n_max + 1, 0.0);
    if (nbar == 0.0) {
        p[0] = 1.0;
        if (tail) *tail = 0.0;
        return p;
    }
    const double r = nbar / (nbar + 1.0);
    double w = 1.0 / (nbar + 1.0);
    double sum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        p[n] = w;
        sum += w;
        w *= r;
    }
    if (tail) *tail = 1.0 - sum;
    for (auto& v : p) v /= sum;
    return p;
}

void write_csv(const CoolingTrajectory& ct, std::ostream& out) {
    out << "cycle,mean_n";
    if (!ct.populations.empty())
        for (std::size_t n = 0; n < ct.populations.front().size(); ++n)
            out << ",p" << n;
    out << '\n';
    for (std::size_t k = 0; k < ct.mean_n.size(); ++k) {
        out << k << ',' << csv::num(ct.mean_n[k]);
        for (double v : ct.populations[k]) out << ',' << csv::num(v);
        out << '\n';
    }
}

}  // namespace spincool
