#include "spincool/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "spincool/csvio.hpp"
#include "spincool/errors.hpp"
#include "spincool/units.hpp"

namespace spincool {

int EigenSystem::index_of(HalfInt mI, HalfInt mJ) const {
    for (int i = 0; i < dim(); ++i)
        if (labels[i].m_I == mI && labels[i].m_J == mJ) return i;
    throw NoSuchState("no state labeled (m_I=" + mI.str() + ", m_J=" + mJ.str() + ")");
}

std::vector<int> EigenSystem::block(HalfInt mF) const {
    std::vector<int> idx;
    for (int i = 0; i < dim(); ++i)
        if (labels[i].m_F == mF) idx.push_back(i);
    return idx;
}

Eigen::MatrixXd build_hamiltonian(const LevelParams& level, HalfInt I, double B_T) {
    if (B_T < 0.0) throw NotApplicable("field magnitude must be >= 0");
    ProductBasis basis{I, level.J};
    const int n = basis.dim();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);

    if (level.A_MHz != 0.0) h += level.A_MHz * idotj(I, level.J);
    if (level.Q_MHz != 0.0) h += level.Q_MHz * quadrupole_operator(I, level.J);

    // field along z: the vector couplings reduce to their z components,
    // which are diagonal in the product basis
    for (int i = 0; i < n; ++i) {
        auto [mI, mJ] = basis.at(i);
        h(i, i) += level.g_J * constants::mu_B_over_h_MHz_per_T * B_T * mJ.value() -
                   level.g_I * constants::mu_N_over_h_MHz_per_T * B_T * mI.value();
    }
    h = 0.5 * (h + h.transpose()).eval();
    return h;
}

namespace {

// deterministic sign: largest-|entry| component positive, lowest index wins ties
void fix_column_signs(Eigen::MatrixXd& vectors) {
    for (int c = 0; c < vectors.cols(); ++c) {
        int imax = 0;
        double best = 0.0;
        for (int r = 0; r < vectors.rows(); ++r) {
            double a = std::abs(vectors(r, c));
            if (a > best + 1e-15) {
                best = a;
                imax = r;
            }
        }
        if (vectors(imax, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

HalfInt support_m_F(const Eigen::VectorXd& v, const ProductBasis& basis) {
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    return basis.m_F(imax);
}

}  // namespace

EigenSystem diagonalize(const Eigen::MatrixXd& H, const ProductBasis& basis, double B_T) {
    if (H.rows() != H.cols() || H.rows() != basis.dim())
        throw DimensionMismatch("Hamiltonian does not match basis dimension");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if (((H - H.transpose()).cwiseAbs().maxCoeff()) > 1e-9 * scale)
        throw NotHermitian("matrix asymmetry exceeds 1e-9 relative");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (H + H.transpose()));
    if (solver.info() != Eigen::Success)
        throw NotHermitian("eigendecomposition failed to converge");

    EigenSystem es;
    es.B_T = B_T;
    es.basis = basis;
    es.energies_MHz = solver.eigenvalues();
    es.vectors = solver.eigenvectors();

    // reorder near-degenerate groups by m_F descending for determinism
    const int n = es.dim();
    std::vector<HalfInt> mf(n);
    for (int i = 0; i < n; ++i) mf[i] = support_m_F(es.vectors.col(i), basis);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int start = 0; start < n;) {
        int end = start + 1;
        while (end < n && es.energies_MHz(end) - es.energies_MHz(start) < 1e-9) ++end;
        std::stable_sort(order.begin() + start, order.begin() + end,
                         [&](int a, int b) { return mf[a] > mf[b]; });
        start = end;
    }
    Eigen::VectorXd e2(n);
    Eigen::MatrixXd v2(n, n);
    es.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        e2(i) = es.energies_MHz(order[i]);
        v2.col(i) = es.vectors.col(order[i]);
    }
    es.energies_MHz = e2;
    es.vectors = v2;
    fix_column_signs(es.vectors);

    for (int i = 0; i < n; ++i) {
        int imax = 0;
        es.vectors.col(i).cwiseAbs().maxCoeff(&imax);
        auto [mI, mJ] = basis.at(imax);
        es.labels[i] = StateLabel{basis.m_F(imax), mI, mJ};
    }
    return es;
}

EigenSystem eigensystem_at(const LevelParams& level, HalfInt I, double B_T) {
    ProductBasis basis{I, level.J};
    return diagonalize(build_hamiltonian(level, I, B_T), basis, B_T);
}

double breit_rabi_energy(const LevelParams& level, HalfInt I, double B_T,
                         HalfInt m_F, int branch, BreitRabiVariant variant) {
    if (I.twice() != 1) throw NotApplicable("closed form requires I = 1/2");
    if (level.Q_MHz != 0.0) throw NotApplicable("closed form requires Q = 0");
    if (branch != 1 && branch != -1) throw NotApplicable("branch must be +1 or -1");
    const double J = level.J.value();
    const double mf = m_F.value();
    if (std::abs(mf) > J + 0.5 + 1e-12)
        throw NoSuchState("m_F outside the manifold");

    const double E_hf = level.A_MHz * (J + 0.5);  // signed
    const double muB = constants::mu_B_over_h_MHz_per_T;
    const double muN = constants::mu_N_over_h_MHz_per_T;
    const double zeeman = (variant == BreitRabiVariant::GJmuB_GImuN)
                              ? (level.g_J * muB + level.g_I * muN)
                              : (level.g_I * muB + level.g_J * muN);
    if (E_hf == 0.0) {
        // degenerate hyperfine limit: pure Zeeman of the product states
        return level.g_J * muB * B_T * mf;
    }
    const double x = zeeman * B_T / E_hf;
    const double mean = -E_hf / (2.0 * (2.0 * J + 1.0)) + level.g_J * muB * B_T * mf;

    const bool stretched = std::abs(std::abs(mf) - (J + 0.5)) < 1e-12;
    if (stretched) {
        if (branch != 1)
            throw NotApplicable("stretched m_F has only the + branch");
        // discriminant is (1 -+ x)^2; the signed root keeps the energy exactly
        // linear through x = 1 instead of kinking with |1 -+ x|
        const double s = (mf > 0) ? 1.0 : -1.0;
        return mean + 0.5 * E_hf * (1.0 - s * x);
    }

    double disc = 1.0 - 4.0 * mf * x / (2.0 * J + 1.0) + x * x;
    if (disc < 0.0) {
        if (disc < -1e-12) throw NotApplicable("negative Breit-Rabi discriminant");
        disc = 0.0;
    }
    return mean + branch * 0.5 * E_hf * std::sqrt(disc);
}

ZeemanDiagram zeeman_sweep(const SpeciesParams& sp, const std::string& term,
                           double B_min_T, double B_max_T, int n_points,
                           ExecPolicy policy) {
    if (!(0.0 <= B_min_T && B_min_T < B_max_T))
        throw NotApplicable("need 0 <= B_min < B_max");
    if (n_points < 2) throw NotApplicable("need at least 2 grid points");

    const LevelParams& level = sp.level(term);
    ProductBasis basis{sp.I, level.J};
    const int n_states = basis.dim();

    std::vector<double> grid(n_points);
    for (int k = 0; k < n_points; ++k)
        grid[k] = B_min_T + (B_max_T - B_min_T) * k / double(n_points - 1);

    std::vector<EigenSystem> systems(n_points);
    parallel_for(static_cast<std::size_t>(n_points), policy, [&](std::size_t k) {
        systems[k] = eigensystem_at(level, sp.I, grid[k]);
    });

    // labels at the top of the sweep: dominant product component
    // (unambiguous in the Paschen-Back regime); then propagate down by
    // maximum overlap within each m_F block
    std::vector<std::vector<int>> state_at(n_points, std::vector<int>(n_states));
    std::iota(state_at[n_points - 1].begin(), state_at[n_points - 1].end(), 0);
    for (int k = n_points - 2; k >= 0; --k) {
        const EigenSystem& hi = systems[k + 1];
        const EigenSystem& lo = systems[k];
        std::vector<int> assign(n_states, -1);
        std::vector<char> taken(n_states, 0);
        for (int curve = 0; curve < n_states; ++curve) {
            const int j_hi = state_at[k + 1][curve];
            const HalfInt mf = hi.labels[j_hi].m_F;
            double best = -1.0;
            int best_i = -1;
            for (int i = 0; i < n_states; ++i) {
                if (taken[i] || lo.labels[i].m_F != mf) continue;
                const double ov = std::abs(lo.vectors.col(i).dot(hi.vectors.col(j_hi)));
                if (ov > best) {
                    best = ov;
                    best_i = i;
                }
            }
            if (best_i < 0 || best < 0.5)
                throw LabelAmbiguity("overlap " + std::to_string(best) +
                                     " below 0.5 between B = " + std::to_string(lo.B_T) +
                                     " and " + std::to_string(hi.B_T) +
                                     " T; refine the grid");
            taken[best_i] = 1;
            assign[curve] = best_i;
        }
        state_at[k] = assign;
    }

    ZeemanDiagram zd;
    zd.species = sp.name;
    zd.term = term;
    zd.B_T = grid;
    zd.states.resize(n_states);
    for (int curve = 0; curve < n_states; ++curve)
        zd.states[curve] = systems[n_points - 1].labels[state_at[n_points - 1][curve]];
    zd.energies_MHz.resize(n_points, n_states);
    for (int k = 0; k < n_points; ++k)
        for (int curve = 0; curve < n_states; ++curve)
            zd.energies_MHz(k, curve) = systems[k].energies_MHz(state_at[k][curve]);
    return zd;
}

ExpansionCoefficients expansion_coefficients(const EigenSystem& es, int state_index) {
    if (state_index < 0 || state_index >= es.dim())
        throw NoSuchState("state index out of range");
    if (es.basis.J.twice() != 2)
        throw NotApplicable("expansion coefficients are defined on J = 1 manifolds");
    ExpansionCoefficients ec;
    ec.m_F = es.labels[state_index].m_F;
    for (int q = -1; q <= 1; ++q) {
        const int idx = es.basis.index_of(ec.m_F - HalfInt(q), HalfInt(q));
        ec.c[q + 1] = (idx >= 0) ? es.vectors(idx, state_index) : 0.0;
    }
    return ec;
}

ExpansionCoefficients expansion_coefficients(const EigenSystem& es, StateLabel label) {
    return expansion_coefficients(es, es.index_of(label.m_I, label.m_J));
}

double splitting(const EigenSystem& es, StateLabel a, StateLabel b) {
    return es.energies_MHz(es.index_of(a.m_I, a.m_J)) -
           es.energies_MHz(es.index_of(b.m_I, b.m_J));
}

void write_csv(const ZeemanDiagram& zd, std::ostream& out) {
    out << "B_T,label_mI,label_mJ,energy_MHz\n";
    for (std::size_t k = 0; k < zd.B_T.size(); ++k)
        for (std::size_t c = 0; c < zd.states.size(); ++c)
            out << csv::num(zd.B_T[k]) << ',' << zd.states[c].m_I.str_decimal() << ','
                << zd.states[c].m_J.str_decimal() << ','
                << csv::num(zd.energies_MHz(k, c)) << '\n';
}

std::string to_json(const ZeemanDiagram& zd) {
    nlohmann::ordered_json j;
    j["species"] = zd.species;
    j["term"] = zd.term;
    j["B_T"] = zd.B_T;
    j["curves"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < zd.states.size(); ++c) {
        nlohmann::ordered_json curve;
        curve["m_I"] = zd.states[c].m_I.str();
        curve["m_J"] = zd.states[c].m_J.str();
        std::vector<double> e(zd.B_T.size());
        for (std::size_t k = 0; k < zd.B_T.size(); ++k) e[k] = zd.energies_MHz(k, c);
        curve["energy_MHz"] = e;
        j["curves"].push_back(curve);
    }
    return j.dump(2);
}

}  // namespace spincool
