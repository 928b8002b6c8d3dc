// Times the parallel sweep kernels against their serial reference paths.

#include <chrono>
#include <cstdio>

#include "spincool/cooling.hpp"
#include "spincool/decay.hpp"
#include "spincool/parallel.hpp"
#include "spincool/species.hpp"
#include "spincool/structure.hpp"

using namespace spincool;

namespace {

template <typename F>
double time_ms(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.1f ms %10.1f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
    SpeciesRegistry reg;
    const auto& sr = reg.get("sr87");
    const auto& yb = reg.get("yb171");

    std::printf("%d worker threads\n%-28s %13s %13s\n", worker_count(), "kernel",
                "serial", "openmp");

    {
        auto serial = time_ms(
            [&] { zeeman_sweep(sr, "1P1", 0.0, 0.15, 1200, ExecPolicy::Serial); });
        auto parallel = time_ms(
            [&] { zeeman_sweep(sr, "1P1", 0.0, 0.15, 1200, ExecPolicy::Parallel); });
        row("zeeman sweep (sr87, 1200)", serial, parallel);
    }
    {
        const QubitEncoding enc{HalfInt::from_twice(9), HalfInt::from_twice(-9)};
        auto serial = time_ms(
            [&] { fidelity_sweep(sr, enc, 0.001, 0.05, 400, ExecPolicy::Serial); });
        auto parallel = time_ms(
            [&] { fidelity_sweep(sr, enc, 0.001, 0.05, 400, ExecPolicy::Parallel); });
        row("fidelity sweep (sr87, 400)", serial, parallel);
    }
    {
        const QubitEncoding enc{HalfInt::from_twice(1), HalfInt::from_twice(-1)};
        auto serial = time_ms(
            [&] { fidelity_sweep(yb, enc, 0.1, 2.0, 2000, ExecPolicy::Serial); });
        auto parallel = time_ms(
            [&] { fidelity_sweep(yb, enc, 0.1, 2.0, 2000, ExecPolicy::Parallel); });
        row("fidelity sweep (yb171, 2000)", serial, parallel);
    }
    {
        CoolingParams p;
        p.trap = {90.0, 759.35, 170.936};
        p.recycle_wavelength_nm = 398.91;
        p.gamma_clock_Hz = 5.7e-3;
        p.n_max = 40;
        auto n0 = thermal_distribution(2.0, p.n_max);
        auto serial = time_ms(
            [&] { mc_cooling(p, n0, 30, 7, 1000000, ExecPolicy::Serial); });
        auto parallel = time_ms(
            [&] { mc_cooling(p, n0, 30, 7, 1000000, ExecPolicy::Parallel); });
        row("mc cooling (1e6 samples)", serial, parallel);
    }
    return 0;
}
