#include "spincool/decay.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "spincool/csvio.hpp"
#include "spincool/errors.hpp"
#include "spincool/units.hpp"

namespace spincool {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

int CombinedBasis::ground_index(HalfInt mI) const {
    for (int g = 0; g < n_ground(); ++g)
        if (ground_mI[g] == mI) return n_excited() + g;
    throw NoSuchState("no ground sublevel m_I = " + mI.str());
}

double DensityMatrix::trace_error() const { return std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag()); }

double DensityMatrix::hermiticity_error() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (rho + rho.adjoint()),
                                                Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate(const DensityMatrixTols& tols) const {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("density matrix not square");
    if (hermiticity_error() > tols.hermiticity)
        throw NotApplicable("density matrix not Hermitian within tolerance");
    if (trace_error() > tols.trace)
        throw NotApplicable("density matrix trace deviates from 1");
    if (min_eigenvalue() < -tols.positivity)
        throw NotApplicable("density matrix has a significantly negative eigenvalue");
}

JumpOperatorSet jump_operators(const EigenSystem& excited, const EigenSystem& ground,
                               double Gamma_MHz) {
    if (excited.basis.I != ground.basis.I)
        throw DimensionMismatch("excited and ground manifolds carry different nuclear spins");
    if (ground.basis.J.twice() != 0)
        throw DimensionMismatch("ground manifold must have J = 0");
    if (Gamma_MHz < 0.0) throw NotApplicable("Gamma must be >= 0");

    JumpOperatorSet set;
    set.Gamma_MHz = Gamma_MHz;
    set.basis.excited = excited.labels;
    set.basis.ground_mI.resize(ground.dim());
    for (int g = 0; g < ground.dim(); ++g) set.basis.ground_mI[g] = ground.labels[g].m_I;

    const int dim = set.basis.dim();
    const double amp = std::sqrt(Gamma_MHz);
    for (auto& L : set.L) L = MatrixXd::Zero(dim, dim);
    for (int k = 0; k < excited.dim(); ++k) {
        const ExpansionCoefficients ec = expansion_coefficients(excited, k);
        for (int q = -1; q <= 1; ++q) {
            const HalfInt mI = ec.m_F - HalfInt(q);
            if (mI.twice() > ground.basis.I.twice() || mI.twice() < -ground.basis.I.twice())
                continue;
            set.L[q + 1](set.basis.ground_index(mI), k) = amp * ec.c_q(q);
        }
    }
    return set;
}

Eigen::VectorXd combined_energies(const EigenSystem& excited, const EigenSystem& ground) {
    VectorXd e(excited.dim() + ground.dim());
    e.head(excited.dim()) = excited.energies_MHz;
    e.tail(ground.dim()) = ground.energies_MHz;
    return e;
}

namespace {

// Dormand-Prince 5(4) coefficients
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600, E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640, E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

// Interaction-picture dissipator.  The Hamiltonian has been diagonalized
// away; only the jump terms remain, with Bohr phases applied exactly through
// the per-stage phase vector.
struct InteractionFrame {
    VectorXd d_ang;                 // eigenenergies, rad/us
    std::vector<MatrixXcd> L_ang;   // rotated jump ops, angular normalization
    MatrixXcd M;                    // sum_q L^dag L (time independent pre-rotation)

    VectorXcd phases(double t) const {
        VectorXcd p(d_ang.size());
        for (int i = 0; i < d_ang.size(); ++i) {
            const double a = d_ang(i) * t;
            p(i) = cplx(std::cos(a), std::sin(a));
        }
        return p;
    }

    MatrixXcd rhs(double t, const MatrixXcd& r) const {
        const VectorXcd p = phases(t);
        const MatrixXcd down = p.conjugate() * p.transpose();  // conj(p_a) p_b
        const MatrixXcd up = down.conjugate();                 // p_a conj(p_b)
        const MatrixXcd sigma = r.cwiseProduct(down);
        MatrixXcd feed = MatrixXcd::Zero(r.rows(), r.cols());
        for (const auto& L : L_ang) feed.noalias() += L * sigma * L.adjoint();
        feed = feed.cwiseProduct(up);
        const MatrixXcd At = M.cwiseProduct(up);
        feed.noalias() -= 0.5 * (At * r + r * At);
        return feed;
    }

    // lab-frame density matrix in the eigenbasis at time t
    MatrixXcd to_lab(double t, const MatrixXcd& r) const {
        const VectorXcd p = phases(t);
        return r.cwiseProduct((p.conjugate() * p.transpose()));
    }
};

}  // namespace

DensityMatrix evolve(const DensityMatrix& rho0, const MatrixXcd& H_MHz,
                     const JumpOperatorSet& jumps, double t_us, double dt_max_us,
                     const EvolveOptions& opts, const StepObserver& observer) {
    const int n = static_cast<int>(rho0.rho.rows());
    if (H_MHz.rows() != n || H_MHz.cols() != n)
        throw DimensionMismatch("Hamiltonian dimension does not match the state");
    for (const auto& L : jumps.L)
        if (L.rows() != n || L.cols() != n)
            throw DimensionMismatch("jump operator dimension does not match the state");
    if (t_us < 0.0) throw NotApplicable("propagation time must be >= 0");
    if (dt_max_us <= 0.0) throw NotApplicable("dt_max must be > 0");
    rho0.validate();

    const double hscale = std::max(1.0, H_MHz.cwiseAbs().maxCoeff());
    if ((H_MHz - H_MHz.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * hscale)
        throw NotHermitian("Hamiltonian asymmetry exceeds 1e-9 relative");

    Eigen::SelfAdjointEigenSolver<MatrixXcd> hs(H_MHz);
    const MatrixXcd U = hs.eigenvectors();

    InteractionFrame fr;
    fr.d_ang = hs.eigenvalues().unaryExpr([](double e) { return to_angular(e); });
    const double ang_amp = std::sqrt(constants::two_pi);
    fr.M = MatrixXcd::Zero(n, n);
    for (const auto& L : jumps.L) {
        MatrixXcd Lt = (U.adjoint() * L.cast<cplx>() * U) * ang_amp;
        fr.M.noalias() += Lt.adjoint() * Lt;
        fr.L_ang.push_back(std::move(Lt));
    }

    MatrixXcd r = U.adjoint() * rho0.rho * U;

    if (t_us == 0.0) {
        DensityMatrix out{rho0.rho, rho0.basis};
        return out;
    }

    double t = 0.0;
    double h = std::min(dt_max_us, t_us);
    {
        const double d0 = r.norm();
        const double d1 = fr.rhs(0.0, r).norm();
        if (d1 > 1e-300) h = std::min(h, 0.01 * (d0 + opts.atol) / d1);
    }
    const double h_min = std::max(1e-14, 1e-12 * t_us);

    MatrixXcd k1, k2, k3, k4, k5, k6, k7, y5;
    while (t < t_us) {
        h = std::min({h, dt_max_us, t_us - t});
        k1 = fr.rhs(t, r);
        k2 = fr.rhs(t + C2 * h, r + h * (A21 * k1));
        k3 = fr.rhs(t + C3 * h, r + h * (A31 * k1 + A32 * k2));
        k4 = fr.rhs(t + C4 * h, r + h * (A41 * k1 + A42 * k2 + A43 * k3));
        k5 = fr.rhs(t + C5 * h, r + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        k6 = fr.rhs(t + h, r + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        y5 = r + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        k7 = fr.rhs(t + h, y5);

        const double err_abs =
            (h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).norm();
        const double tol = opts.atol + opts.rtol * std::max(r.norm(), y5.norm());
        const double err = err_abs / tol;

        if (err <= 1.0) {
            t += h;
            r = 0.5 * (y5 + y5.adjoint().eval());  // keep exact hermiticity
            if (observer) {
                const MatrixXcd lab = U * fr.to_lab(t, r) * U.adjoint();
                observer(StepRecord{t, h, lab});
            }
        } else if (h <= h_min) {
            throw StepFailure("error " + std::to_string(err) +
                              " above tolerance at minimum step size");
        }
        const double factor =
            std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        h = std::max(h * factor, h_min);
    }

    DensityMatrix out;
    out.basis = rho0.basis;
    out.rho = U * fr.to_lab(t_us, r) * U.adjoint();
    out.rho = 0.5 * (out.rho + out.rho.adjoint().eval());
    out.validate();
    return out;
}

namespace {

MatrixXcd kron_c(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k)
            out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    return out;
}

}  // namespace

DensityMatrix superoperator_propagate(const DensityMatrix& rho0, const MatrixXcd& H_MHz,
                                      const JumpOperatorSet& jumps, double t_us) {
    const int n = static_cast<int>(rho0.rho.rows());
    const MatrixXcd id = MatrixXcd::Identity(n, n);
    const MatrixXcd Hang = H_MHz * constants::two_pi;

    MatrixXcd S = cplx(0.0, -1.0) * (kron_c(id, Hang) - kron_c(Hang.transpose(), id));
    for (const auto& Lr : jumps.L) {
        const MatrixXcd L = Lr.cast<cplx>() * std::sqrt(constants::two_pi);
        const MatrixXcd LdL = L.adjoint() * L;
        S += kron_c(L.conjugate(), L) - 0.5 * kron_c(id, LdL) -
             0.5 * kron_c(LdL.transpose(), id);
    }

    const MatrixXcd P = (S * t_us).exp();
    Eigen::Map<const VectorXcd> v0(rho0.rho.data(), n * n);
    const VectorXcd vt = P * v0;

    DensityMatrix out;
    out.basis = rho0.basis;
    out.rho = Eigen::Map<const MatrixXcd>(vt.data(), n, n);
    out.rho = 0.5 * (out.rho + out.rho.adjoint().eval());
    return out;
}

std::complex<double> coherence_closed_form(cplx rho_e0, double Gamma_MHz,
                                           double Gamma_prime_MHz, double delta_MHz,
                                           double Delta_g_MHz, double t_us) {
    const double G = to_angular(Gamma_MHz);
    const double Gp = to_angular(Gamma_prime_MHz);
    const double d = to_angular(delta_MHz);
    const double Dg = to_angular(Delta_g_MHz);
    if (G <= 0.0) throw NotApplicable("Gamma must be > 0");
    if (t_us < 10.0 / G)
        throw NotApplicable("closed form valid only for t >= 10/Gamma");
    const cplx transfer = Gp / cplx(G, -d);
    return rho_e0 * transfer * std::exp(cplx(0.0, -Dg * t_us));
}

namespace {

// the most pi-polarized eigenstate in the m_F block: the m_J = 0 branch
// wherever the Paschen-Back labels are meaningful
std::pair<int, ExpansionCoefficients> pick_mj0_state(const EigenSystem& exc, HalfInt mF) {
    int best = -1;
    ExpansionCoefficients best_ec;
    double best_c0 = -1.0;
    for (int i : exc.block(mF)) {
        const ExpansionCoefficients ec = expansion_coefficients(exc, i);
        if (std::abs(ec.c_q(0)) > best_c0) {
            best_c0 = std::abs(ec.c_q(0));
            best = i;
            best_ec = ec;
        }
    }
    if (best < 0) throw NoSuchState("no excited state with m_F = " + mF.str());
    return {best, best_ec};
}

void check_encoding(const SpeciesParams& sp, const QubitEncoding& enc) {
    if (enc.m_up == enc.m_down) throw NotApplicable("qubit requires m_up != m_down");
    for (HalfInt m : {enc.m_up, enc.m_down}) {
        if (m.twice() > sp.I.twice() || m.twice() < -sp.I.twice() ||
            (sp.I.twice() - m.twice()) % 2 != 0)
            throw InvalidSpins("projection " + m.str() + " invalid for I = " + sp.I.str());
    }
}

}  // namespace

TransferResult transfer_fidelity(const SpeciesParams& sp, const QubitEncoding& enc,
                                 double B_T) {
    check_encoding(sp, enc);
    const LevelParams& p1 = sp.level("1P1");
    const LevelParams& gslev = sp.level("1S0");
    const EigenSystem exc = eigensystem_at(p1, sp.I, B_T);
    const EigenSystem gnd = eigensystem_at(gslev, sp.I, B_T);

    const auto [iu, cu] = pick_mj0_state(exc, enc.m_up);
    const auto [idn, cd] = pick_mj0_state(exc, enc.m_down);

    auto ground_energy = [&](HalfInt m) {
        const auto blk = gnd.block(m);
        if (blk.empty()) throw NoSuchState("no ground sublevel m_I = " + m.str());
        return gnd.energies_MHz(blk.front());
    };

    const double Gamma = p1.gamma_MHz;
    TransferResult r;
    r.B_T = B_T;
    r.Gamma_prime_MHz = Gamma * cu.c_q(0) * cd.c_q(0);
    const double Delta_e = exc.energies_MHz(iu) - exc.energies_MHz(idn);
    const double Delta_g = ground_energy(enc.m_up) - ground_energy(enc.m_down);
    r.delta_MHz = Delta_g - Delta_e;
    r.fidelity = (r.Gamma_prime_MHz * r.Gamma_prime_MHz) /
                 (Gamma * Gamma + r.delta_MHz * r.delta_MHz);
    r.purity = std::min(cu.c_q(0) * cu.c_q(0), cd.c_q(0) * cd.c_q(0));
    r.low_purity = r.purity < 0.9;
    return r;
}

double fidelity_via_master_equation(const SpeciesParams& sp, const QubitEncoding& enc,
                                    double B_T, const EvolveOptions& opts) {
    check_encoding(sp, enc);
    const LevelParams& p1 = sp.level("1P1");
    const EigenSystem exc = eigensystem_at(p1, sp.I, B_T);
    const EigenSystem gnd = eigensystem_at(sp.level("1S0"), sp.I, B_T);
    const JumpOperatorSet jumps = jump_operators(exc, gnd, p1.gamma_MHz);

    const int iu = pick_mj0_state(exc, enc.m_up).first;
    const int idn = pick_mj0_state(exc, enc.m_down).first;

    const int dim = jumps.basis.dim();
    DensityMatrix rho0;
    rho0.basis = jumps.basis;
    rho0.rho = MatrixXcd::Zero(dim, dim);
    rho0.rho(iu, iu) = 0.5;
    rho0.rho(idn, idn) = 0.5;
    rho0.rho(iu, idn) = 0.5;
    rho0.rho(idn, iu) = 0.5;

    const VectorXd e = combined_energies(exc, gnd);
    const MatrixXcd H = e.cast<cplx>().asDiagonal();

    const double t_final = 20.0 / to_angular(p1.gamma_MHz);
    const DensityMatrix out = evolve(rho0, H, jumps, t_final, t_final / 20.0, opts);

    const int gu = jumps.basis.ground_index(enc.m_up);
    const int gd = jumps.basis.ground_index(enc.m_down);
    const double mag = std::abs(out.rho(gu, gd));
    return mag * mag / 0.25;
}

FidelityCurve fidelity_sweep(const SpeciesParams& sp, const QubitEncoding& enc,
                             double B_min_T, double B_max_T, int n_points,
                             ExecPolicy policy) {
    if (n_points < 1) throw NotApplicable("need at least one grid point");
    if (B_min_T < 0.0 || B_max_T < B_min_T) throw NotApplicable("bad field range");
    FidelityCurve fc;
    fc.species = sp.name;
    fc.encoding = enc;
    fc.points.resize(n_points);
    parallel_for(static_cast<std::size_t>(n_points), policy, [&](std::size_t k) {
        const double B = (n_points == 1)
                             ? B_min_T
                             : B_min_T + (B_max_T - B_min_T) * k / double(n_points - 1);
        fc.points[k] = transfer_fidelity(sp, enc, B);
    });
    return fc;
}

void write_csv(const FidelityCurve& fc, std::ostream& out) {
    out << "B_T,fidelity,Gamma_prime_MHz,delta_MHz,purity\n";
    for (const auto& p : fc.points)
        out << csv::num(p.B_T) << ',' << csv::num(p.fidelity) << ','
            << csv::num(p.Gamma_prime_MHz) << ',' << csv::num(p.delta_MHz) << ','
            << csv::num(p.purity) << '\n';
}

std::string to_json(const FidelityCurve& fc) {
    nlohmann::ordered_json j;
    j["species"] = fc.species;
    j["m_up"] = fc.encoding.m_up.str();
    j["m_down"] = fc.encoding.m_down.str();
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : fc.points) {
        nlohmann::ordered_json e;
        e["B_T"] = p.B_T;
        e["fidelity"] = p.fidelity;
        e["Gamma_prime_MHz"] = p.Gamma_prime_MHz;
        e["delta_MHz"] = p.delta_MHz;
        e["purity"] = p.purity;
        e["low_purity"] = p.low_purity;
        j["points"].push_back(e);
    }
    return j.dump(2);
}

}  // namespace spincool
