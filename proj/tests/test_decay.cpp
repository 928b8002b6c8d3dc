#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "spincool/decay.hpp"
#include "spincool/errors.hpp"
#include "spincool/units.hpp"

using namespace spincool;
using cplx = std::complex<double>;

namespace {

HalfInt half(int twice) { return HalfInt::from_twice(twice); }

SpeciesRegistry& registry() {
    static SpeciesRegistry reg;
    return reg;
}

struct System {
    EigenSystem exc, gnd;
    JumpOperatorSet jumps;
    Eigen::MatrixXcd H;
};

System make_system(const std::string& species, double B) {
    const auto& sp = registry().get(species);
    System s;
    s.exc = eigensystem_at(sp.level("1P1"), sp.I, B);
    s.gnd = eigensystem_at(sp.level("1S0"), sp.I, B);
    s.jumps = jump_operators(s.exc, s.gnd, sp.level("1P1").gamma_MHz);
    s.H = combined_energies(s.exc, s.gnd).cast<cplx>().asDiagonal();
    return s;
}

Eigen::MatrixXcd random_density(int dim, std::mt19937& rng) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = cplx(gauss(rng), gauss(rng));
    Eigen::MatrixXcd rho = g * g.adjoint();
    rho /= rho.trace().real();
    return rho;
}

}  // namespace

TEST_CASE("jump operator structure") {
    SUBCASE("completeness sum_q Lq^dag Lq = Gamma P_e at several fields") {
        for (double B : {0.0, 0.01, 0.12, 1.0}) {
            auto s = make_system("sr87", B);
            const int ne = s.jumps.basis.n_excited();
            const int dim = s.jumps.basis.dim();
            Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
            for (const auto& L : s.jumps.L) sum += L.transpose() * L;
            Eigen::MatrixXd pe = Eigen::MatrixXd::Zero(dim, dim);
            pe.topLeftCorner(ne, ne).setIdentity();
            CHECK((sum - s.jumps.Gamma_MHz * pe).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }
    SUBCASE("strictly excited -> ground") {
        auto s = make_system("yb171", 0.5);
        const int ne = s.jumps.basis.n_excited();
        for (const auto& L : s.jumps.L) {
            // nonzero only in the ground-row x excited-column block
            CHECK(L.topRows(ne).cwiseAbs().maxCoeff() == 0.0);
            CHECK(L.rightCols(L.cols() - ne).bottomRows(L.rows() - ne)
                      .cwiseAbs().maxCoeff() == 0.0);
        }
    }
    SUBCASE("decoupled limit: m_J = 0 columns are pure pi emitters") {
        auto s = make_system("yb171", 100.0);
        const double amp = std::sqrt(s.jumps.Gamma_MHz);
        for (int k = 0; k < s.exc.dim(); ++k) {
            if (s.exc.labels[k].m_J.twice() != 0) continue;
            CHECK(s.jumps.q(0).col(k).cwiseAbs().maxCoeff() ==
                  doctest::Approx(amp).epsilon(1e-7));
            CHECK(s.jumps.q(+1).col(k).cwiseAbs().maxCoeff() <= 1e-3 * amp);
            CHECK(s.jumps.q(-1).col(k).cwiseAbs().maxCoeff() <= 1e-3 * amp);
        }
    }
    SUBCASE("B = 0 amplitudes reproduce the Clebsch-Gordan structure") {
        auto s = make_system("yb171", 0.0);
        // the |F, m_F = 1/2> eigenstates: |c_q| = |<1/2, 1/2 - q; 1 q | F, 1/2>|
        for (int k = 0; k < s.exc.dim(); ++k) {
            if (s.exc.labels[k].m_F.twice() != 1) continue;
            const auto ec = expansion_coefficients(s.exc, k);
            const double e = s.exc.energies_MHz(k);
            const HalfInt F = (std::abs(e + 108.0) < 1e-6) ? half(3) : half(1);
            for (int q = -1; q <= 1; ++q) {
                if (std::abs(1 - 2 * q) > 1) {  // m_I = m_F - q outside I = 1/2
                    CHECK(ec.c_q(q) == 0.0);
                    continue;
                }
                const double cg = clebsch_gordan(half(1), half(1 - 2 * q), half(2),
                                                 HalfInt(q), F, half(1));
                CHECK(std::abs(ec.c_q(q)) == doctest::Approx(std::abs(cg)).epsilon(1e-9));
            }
        }
        // sigma channels are populated at zero field
        CHECK(s.jumps.q(+1).cwiseAbs().maxCoeff() > 0.1);
        CHECK(s.jumps.q(-1).cwiseAbs().maxCoeff() > 0.1);
    }
    SUBCASE("mismatched nuclear spins rejected") {
        const auto& yb = registry().get("yb171");
        const auto& sr = registry().get("sr87");
        auto exc = eigensystem_at(yb.level("1P1"), yb.I, 0.1);
        auto gnd = eigensystem_at(sr.level("1S0"), sr.I, 0.1);
        CHECK_THROWS_AS(jump_operators(exc, gnd, 29.1), DimensionMismatch);
    }
}

TEST_CASE("evolve: closed-system limit rotates coherences at Bohr frequencies") {
    const int n = 3;
    Eigen::VectorXd e(n);
    e << 0.0, 1.5, 4.0;  // MHz
    Eigen::MatrixXcd H = e.cast<cplx>().asDiagonal();
    JumpOperatorSet none;
    for (auto& L : none.L) L = Eigen::MatrixXd::Zero(n, n);

    DensityMatrix rho0;
    rho0.rho = Eigen::MatrixXcd::Constant(n, n, cplx(1.0 / n, 0.0));

    const double t = 0.3;  // us
    auto out = evolve(rho0, H, none, t, 0.05);
    for (int a = 0; a < n; ++a) {
        CHECK(std::abs(out.rho(a, a) - rho0.rho(a, a)) <= 1e-12);
        for (int b = 0; b < n; ++b) {
            const cplx expect =
                rho0.rho(a, b) * std::exp(cplx(0.0, -to_angular(e(a) - e(b)) * t));
            CHECK(std::abs(out.rho(a, b) - expect) <= 1e-10);
        }
    }
}

TEST_CASE("evolve: population decay at rate 2pi Gamma") {
    auto s = make_system("yb171", 1.0);
    const int dim = s.jumps.basis.dim();
    DensityMatrix rho0;
    rho0.basis = s.jumps.basis;
    rho0.rho = Eigen::MatrixXcd::Zero(dim, dim);
    rho0.rho(0, 0) = 1.0;  // one excited eigenstate

    const double Gamma_ang = to_angular(s.jumps.Gamma_MHz);
    const double t = 10.0 / Gamma_ang;
    auto out = evolve(rho0, s.H, s.jumps, t, t / 10.0);

    double ground = 0.0;
    for (int gidx = s.jumps.basis.n_excited(); gidx < dim; ++gidx)
        ground += out.rho(gidx, gidx).real();
    CHECK(ground >= 0.9999);
    CHECK(out.rho(0, 0).real() == doctest::Approx(std::exp(-10.0)).epsilon(1e-6));
}

TEST_CASE("adaptive steps never exceed dt_max") {
    auto s = make_system("yb171", 0.5);
    const int dim = s.jumps.basis.dim();
    DensityMatrix rho0;
    rho0.basis = s.jumps.basis;
    rho0.rho = Eigen::MatrixXcd::Zero(dim, dim);
    rho0.rho(2, 2) = 1.0;
    const double t = 0.05, dt_max = 1.7e-3;
    evolve(rho0, s.H, s.jumps, t, dt_max, {}, [&](const StepRecord& rec) {
        CHECK(rec.h_us <= dt_max * (1.0 + 1e-12));
        CHECK(rec.t_us <= t * (1.0 + 1e-12));
    });
}

TEST_CASE("CPTP invariants hold at every accepted step") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> field(0.01, 1.5);
    for (int trial = 0; trial < 6; ++trial) {
        auto s = make_system(trial % 2 ? "yb171" : "sr87",
                             trial % 2 ? field(rng) : 0.1 * field(rng));
        const int dim = s.jumps.basis.dim();
        DensityMatrix rho0;
        rho0.basis = s.jumps.basis;
        rho0.rho = random_density(dim, rng);

        int steps = 0;
        const double t = 2.0 / to_angular(s.jumps.Gamma_MHz);
        evolve(rho0, s.H, s.jumps, t, t / 5.0, {},
               [&](const StepRecord& rec) {
                   ++steps;
                   DensityMatrix dm{rec.rho, {}};
                   CHECK(dm.trace_error() <= 1e-9);
                   CHECK(dm.hermiticity_error() <= 1e-10);
                   CHECK(dm.min_eigenvalue() >= -1e-9);
               });
        CHECK(steps >= 3);
    }
}

TEST_CASE("evolve agrees with the superoperator exponential") {
    std::mt19937 rng(21);
    SUBCASE("full Yb system") {
        auto s = make_system("yb171", 0.7);
        DensityMatrix rho0;
        rho0.basis = s.jumps.basis;
        rho0.rho = random_density(s.jumps.basis.dim(), rng);
        const double t = 1.5 / to_angular(s.jumps.Gamma_MHz);
        auto a = evolve(rho0, s.H, s.jumps, t, t / 10.0);
        auto b = superoperator_propagate(rho0, s.H, s.jumps, t);
        CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("synthetic non-diagonal Hamiltonian") {
        const int n = 4;
        Eigen::MatrixXcd H(n, n);
        std::normal_distribution<double> gauss;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) H(i, j) = cplx(gauss(rng), gauss(rng));
        H = (0.5 * (H + H.adjoint())).eval();
        JumpOperatorSet jumps;
        jumps.Gamma_MHz = 1.0;
        for (auto& L : jumps.L) L = Eigen::MatrixXd::Zero(n, n);
        jumps.L[0](3, 0) = 0.6;
        jumps.L[1](2, 0) = 0.5;
        jumps.L[1](3, 1) = 0.4;
        DensityMatrix rho0;
        rho0.rho = random_density(n, rng);
        auto a = evolve(rho0, H, jumps, 0.8, 0.1);
        auto b = superoperator_propagate(rho0, H, jumps, 0.8);
        CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("closed form: limits and modulus identity") {
    SUBCASE("perfect transfer in the Paschen-Back limit") {
        const cplx in(0.3, -0.2);
        const cplx out = coherence_closed_form(in, 30.0, 30.0, 0.0, 0.0, 1.0);
        CHECK(std::abs(out - in) <= 1e-12);
    }
    SUBCASE("modulus reproduces the fidelity formula") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(0.1, 50.0);
        for (int k = 0; k < 50; ++k) {
            const double G = u(rng), Gp = u(rng), d = u(rng) - 25.0, Dg = u(rng);
            const cplx in(0.5, 0.1);
            const double t = 15.0 / to_angular(G);
            const cplx out = coherence_closed_form(in, G, Gp, d, Dg, t);
            const double F = std::norm(out) / std::norm(in);
            CHECK(F == doctest::Approx(Gp * Gp / (G * G + d * d)).epsilon(1e-12));
        }
    }
    SUBCASE("t below 10/Gamma is rejected") {
        CHECK_THROWS_AS(coherence_closed_form(cplx(1, 0), 30.0, 30.0, 0.0, 0.0, 1e-4),
                        NotApplicable);
    }
}

TEST_CASE("two-variable ODE oracle matches the closed form at t = 20/Gamma") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(5.0, 40.0);
    for (int k = 0; k < 10; ++k) {
        const double G = u(rng);
        const double Gp = G * std::uniform_real_distribution<double>(0.8, 1.0)(rng);
        const double d = std::uniform_real_distribution<double>(-10.0, 10.0)(rng);
        const double Dg = std::uniform_real_distribution<double>(-20.0, 20.0)(rng);
        const double De = Dg - d;
        const cplx rho_e0(0.5, 0.0);
        const double t = 20.0 / to_angular(G);
        auto ode = oracles::integrate_coherence_odes(
            rho_e0, to_angular(G), to_angular(Gp), to_angular(De), to_angular(Dg), t,
            20000);
        const cplx closed = coherence_closed_form(rho_e0, G, Gp, d, Dg, t);
        CHECK(std::abs(ode.rho_g - closed) <= 1e-8);
    }
}

TEST_CASE("full master equation matches the closed form including phase") {
    const auto& yb = registry().get("yb171");
    const QubitEncoding enc{half(1), half(-1)};
    const double B = 1.0;

    auto s = make_system("yb171", B);
    const auto tf = transfer_fidelity(yb, enc, B);

    // equal superposition of the two m_J = 0 excited states
    const int iu = s.exc.index_of(half(1), half(0));
    const int idn = s.exc.index_of(half(-1), half(0));
    const int dim = s.jumps.basis.dim();
    DensityMatrix rho0;
    rho0.basis = s.jumps.basis;
    rho0.rho = Eigen::MatrixXcd::Zero(dim, dim);
    rho0.rho(iu, iu) = rho0.rho(idn, idn) = 0.5;
    rho0.rho(iu, idn) = rho0.rho(idn, iu) = 0.5;

    const double Gamma = s.jumps.Gamma_MHz;
    const double t = 20.0 / to_angular(Gamma);
    auto out = evolve(rho0, s.H, s.jumps, t, t / 20.0);

    const int gu = s.jumps.basis.ground_index(half(1));
    const int gd = s.jumps.basis.ground_index(half(-1));
    const cplx me = out.rho(gu, gd);

    const double Delta_g = s.gnd.energies_MHz(gu - s.jumps.basis.n_excited()) -
                           s.gnd.energies_MHz(gd - s.jumps.basis.n_excited());
    const cplx closed = coherence_closed_form(cplx(0.5, 0.0), Gamma,
                                              tf.Gamma_prime_MHz, tf.delta_MHz,
                                              Delta_g, t);
    CHECK(std::abs(me - closed) <= 1e-6);
    CHECK(std::abs(me) == doctest::Approx(std::abs(closed)).epsilon(1e-5));

    SUBCASE("phase advances linearly at the ground Bohr rate") {
        const double t2 = t * 1.35;
        auto out2 = evolve(rho0, s.H, s.jumps, t2, t2 / 20.0);
        const cplx me2 = out2.rho(gu, gd);
        double dphi = std::arg(me2) - std::arg(me) + to_angular(Delta_g) * (t2 - t);
        dphi = std::remainder(dphi, constants::two_pi);
        CHECK(std::abs(dphi) <= 1e-5);
    }
}

TEST_CASE("transfer fidelity landmarks") {
    const auto& yb = registry().get("yb171");
    const auto& sr = registry().get("sr87");
    SUBCASE("Yb at 1 T is near 0.99") {
        const auto r = transfer_fidelity(yb, {half(1), half(-1)}, 1.0);
        CHECK(r.fidelity > 0.97);
        CHECK(r.fidelity < 0.999);
        CHECK(r.Gamma_prime_MHz <= yb.level("1P1").gamma_MHz);
        CHECK(!r.low_purity);
        CHECK(r.fidelity ==
              doctest::Approx(r.Gamma_prime_MHz * r.Gamma_prime_MHz /
                              (29.1 * 29.1 + r.delta_MHz * r.delta_MHz)));
    }
    SUBCASE("Sr pair 9/2 at 10 mT is above 0.99") {
        const auto r = transfer_fidelity(sr, {half(9), half(-9)}, 0.010);
        CHECK(r.fidelity > 0.99);
    }
    SUBCASE("fidelity increases toward 1 with field") {
        double prev = 0.0;
        for (double B : {0.5, 1.0, 2.0, 5.0, 20.0}) {
            const auto r = transfer_fidelity(yb, {half(1), half(-1)}, B);
            CHECK(r.fidelity > prev);
            prev = r.fidelity;
        }
        CHECK(prev > 0.9999);
    }
    SUBCASE("identical projections rejected") {
        CHECK_THROWS_AS(transfer_fidelity(yb, {half(1), half(1)}, 1.0), NotApplicable);
        CHECK_THROWS_AS(transfer_fidelity(yb, {half(3), half(-1)}, 1.0), InvalidSpins);
    }
    SUBCASE("asymptotic region: Gamma' rises to Gamma and |delta| falls, monotonically") {
        // region starts at 5x the field where |A|/(gJ muB B) = 0.1
        const double B_star = 5.0 * 10.0 * 216.0 / constants::mu_B_over_h_MHz_per_T;
        double prev_gp = 0.0, prev_delta = 1e300;
        for (int k = 0; k <= 12; ++k) {
            const double B = B_star * std::pow(1.5, k);
            const auto r = transfer_fidelity(yb, {half(1), half(-1)}, B);
            CHECK(r.Gamma_prime_MHz <= yb.level("1P1").gamma_MHz + 1e-12);
            CHECK(r.Gamma_prime_MHz >= prev_gp);
            CHECK(std::abs(r.delta_MHz) <= prev_delta);
            prev_gp = r.Gamma_prime_MHz;
            prev_delta = std::abs(r.delta_MHz);
        }
        CHECK(prev_gp / yb.level("1P1").gamma_MHz > 1.0 - 1e-6);
        CHECK(prev_delta < 0.05);
    }
}

TEST_CASE("fidelity sweep") {
    const auto& yb = registry().get("yb171");
    const QubitEncoding enc{half(1), half(-1)};
    SUBCASE("single point equals transfer_fidelity") {
        auto curve = fidelity_sweep(yb, enc, 1.0, 1.0, 1);
        REQUIRE(curve.points.size() == 1);
        const auto direct = transfer_fidelity(yb, enc, 1.0);
        CHECK(curve.points[0].fidelity == direct.fidelity);
    }
    SUBCASE("serial equals parallel bytewise") {
        auto a = fidelity_sweep(yb, enc, 0.1, 2.0, 33, ExecPolicy::Serial);
        auto b = fidelity_sweep(yb, enc, 0.1, 2.0, 33, ExecPolicy::Parallel);
        for (std::size_t k = 0; k < a.points.size(); ++k) {
            CHECK(a.points[k].fidelity == b.points[k].fidelity);
            CHECK(a.points[k].delta_MHz == b.points[k].delta_MHz);
        }
    }
}

TEST_CASE("step failure surfaces as StepFailure") {
    auto s = make_system("yb171", 1.0);
    const int dim = s.jumps.basis.dim();
    DensityMatrix rho0;
    rho0.basis = s.jumps.basis;
    rho0.rho = Eigen::MatrixXcd::Zero(dim, dim);
    rho0.rho(0, 0) = 1.0;
    EvolveOptions opts;
    opts.rtol = 0.0;
    opts.atol = 0.0;  // unattainable tolerance
    CHECK_THROWS_AS(evolve(rho0, s.H, s.jumps, 0.1, 0.01, opts), StepFailure);
}
