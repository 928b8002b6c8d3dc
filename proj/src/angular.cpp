#include "spincool/angular.hpp"

#include <array>
#include <cmath>

#include "spincool/errors.hpp"

namespace spincool {

SpinMatrices spin_matrices(HalfInt j) {
    if (j.twice() < 0) throw InvalidSpins("spin j must be >= 0");
    const int n = multiplicity(j);
    SpinMatrices s;
    s.jz = Eigen::MatrixXd::Zero(n, n);
    s.jplus = Eigen::MatrixXd::Zero(n, n);
    const double jv = j.value();
    for (int k = 0; k < n; ++k) {
        const double m = jv - k;  // descending
        s.jz(k, k) = m;
        if (k > 0)  // |m+1> sits at row k-1
            s.jplus(k - 1, k) = std::sqrt(jv * (jv + 1.0) - m * (m + 1.0));
    }
    s.jminus = s.jplus.transpose();
    return s;
}

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k)
            out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    return out;
}

void symmetrize(Eigen::MatrixXd& h) { h = 0.5 * (h + h.transpose()).eval(); }

}  // namespace

Eigen::MatrixXd idotj(HalfInt I, HalfInt J) {
    if (I.twice() < 0 || J.twice() < 0) throw InvalidSpins("spins must be >= 0");
    const SpinMatrices si = spin_matrices(I);
    const SpinMatrices sj = spin_matrices(J);
    Eigen::MatrixXd op = kron(si.jz, sj.jz) +
                         0.5 * (kron(si.jplus, sj.jminus) + kron(si.jminus, sj.jplus));
    symmetrize(op);
    return op;
}

Eigen::MatrixXd quadrupole_operator(HalfInt I, HalfInt J) {
    if (I.twice() <= 1 || J.twice() <= 1)
        throw QuadrupoleUndefined("quadrupole term undefined for I <= 1/2 or J <= 1/2");
    const double iv = I.value(), jv = J.value();
    const double denom = 2.0 * iv * jv * (2.0 * iv - 1.0) * (2.0 * jv - 1.0);
    const Eigen::MatrixXd ij = idotj(I, J);
    const int n = ij.rows();
    Eigen::MatrixXd op =
        (3.0 * (ij * ij) + 1.5 * ij -
         iv * (iv + 1.0) * jv * (jv + 1.0) * Eigen::MatrixXd::Identity(n, n)) /
        denom;
    symmetrize(op);
    return op;
}

Eigen::VectorXd fz_diagonal(ProductBasis basis) {
    Eigen::VectorXd fz(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) fz(i) = basis.m_F(i).value();
    return fz;
}

namespace {

// log(n!) for n = 0..MAX_FACT; filled on first use
constexpr int MAX_FACT = 100;

double log_factorial(int n) {
    static const std::array<double, MAX_FACT + 1> table = [] {
        std::array<double, MAX_FACT + 1> t{};
        t[0] = 0.0;
        for (int i = 1; i <= MAX_FACT; ++i) t[i] = t[i - 1] + std::log(double(i));
        return t;
    }();
    return table[n];
}

// all arguments twice-values; they are guaranteed even (true integers * 2)
double log_fact_half(int twice) { return log_factorial(twice / 2); }

}  // namespace

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                      HalfInt F, HalfInt mF) {
    auto bad = [](HalfInt j, HalfInt m) {
        return m.twice() > j.twice() || m.twice() < -j.twice() ||
               (j.twice() - m.twice()) % 2 != 0;
    };
    if (j1.twice() < 0 || j2.twice() < 0 || F.twice() < 0)
        throw InvalidSpins("spins must be >= 0");
    if (bad(j1, m1) || bad(j2, m2) || bad(F, mF))
        throw InvalidSpins("projection exceeds its spin or has wrong parity");

    if (m1.twice() + m2.twice() != mF.twice()) return 0.0;
    if (F.twice() < std::abs(j1.twice() - j2.twice()) || F.twice() > j1.twice() + j2.twice())
        return 0.0;
    if ((j1.twice() + j2.twice() + F.twice()) % 2 != 0) return 0.0;

    // Racah's sum.  Work with twice-values so every factorial argument is an
    // exact even integer.
    const int tj1 = j1.twice(), tj2 = j2.twice(), tF = F.twice();
    const int tm1 = m1.twice(), tm2 = m2.twice(), tmF = mF.twice();

    const double log_prefactor =
        std::log(tF + 1.0)  // (2F+1)
        + log_fact_half(tF + tj1 - tj2) + log_fact_half(tF - tj1 + tj2) +
        log_fact_half(tj1 + tj2 - tF) - log_fact_half(tj1 + tj2 + tF + 2) +
        log_fact_half(tF + tmF) + log_fact_half(tF - tmF) +
        log_fact_half(tj1 - tm1) + log_fact_half(tj1 + tm1) +
        log_fact_half(tj2 - tm2) + log_fact_half(tj2 + tm2);

    // sum over k with all factorial arguments nonnegative
    int k_min = 0;
    k_min = std::max(k_min, (tj2 - tF - tm1) / 2);
    k_min = std::max(k_min, (tj1 + tm2 - tF) / 2);
    int k_max = (tj1 + tj2 - tF) / 2;
    k_max = std::min(k_max, (tj1 - tm1) / 2);
    k_max = std::min(k_max, (tj2 + tm2) / 2);

    double sum = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        const double log_den = log_factorial(k) + log_fact_half(tj1 + tj2 - tF - 2 * k) +
                               log_fact_half(tj1 - tm1 - 2 * k) +
                               log_fact_half(tj2 + tm2 - 2 * k) +
                               log_fact_half(tF - tj2 + tm1 + 2 * k) +
                               log_fact_half(tF - tj1 - tm2 + 2 * k);
        const double term = std::exp(0.5 * log_prefactor - log_den);
        sum += (k % 2 == 0) ? term : -term;
    }
    return sum;
}

}  // namespace spincool
