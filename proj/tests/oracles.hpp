// Independent reference implementations used only by the test suites.
// These deliberately avoid the library's own code paths.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracles {

// Integer-order Bessel J_n(x) by Miller's downward recurrence with the
// sum rule J_0 + 2 sum_k J_2k = 1 for normalization.
inline std::vector<double> bessel_jn_table(int n_max, double x) {
    const int start = 2 * (n_max + static_cast<int>(x)) + 40;
    std::vector<double> f(start + 2, 0.0);
    f[start + 1] = 0.0;
    f[start] = 1e-300;
    for (int k = start; k >= 1; --k) {
        f[k - 1] = (2.0 * k / x) * f[k] - f[k + 1];
        if (std::abs(f[k - 1]) > 1e250) {
            for (int j = k - 1; j <= start + 1; ++j) f[j] *= 1e-250;
        }
    }
    double norm = f[0];
    for (int k = 2; k <= start; k += 2) norm += 2.0 * f[k];
    std::vector<double> jn(n_max + 1);
    for (int k = 0; k <= n_max; ++k) jn[k] = f[k] / norm;
    return jn;
}

// exp(-i H t) c0 for a real symmetric H, via dense eigendecomposition.
inline std::vector<std::complex<double>> expm_propagate(
    const Eigen::MatrixXd& h, const std::vector<std::complex<double>>& c0, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    const Eigen::Index n = h.rows();
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = c0[i];
    Eigen::VectorXcd coeff = evecs.transpose() * v;
    for (Eigen::Index k = 0; k < n; ++k)
        coeff(k) *= std::exp(std::complex<double>(0.0, -evals(k) * t));
    Eigen::VectorXcd out = evecs * coeff;
    std::vector<std::complex<double>> res(n);
    for (Eigen::Index i = 0; i < n; ++i) res[i] = out(i);
    return res;
}

// Lyapunov localization length of the infinite chain at energy E:
// psi_{n+1} = (v_n - E) psi_n - psi_{n-1}, v_n uniform in [-W/2, W/2].
inline double transfer_matrix_ell(double W, double E, long long n_sites,
                                  unsigned long long seed) {
    std::mt19937_64 gen(seed);
    auto uniform = [&]() {
        return W * (static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5);
    };
    double psi_prev = 0.0, psi = 1.0, log_growth = 0.0;
    for (long long n = 0; n < n_sites; ++n) {
        const double psi_next = (uniform() - E) * psi - psi_prev;
        psi_prev = psi;
        psi = psi_next;
        const double mag = std::max(std::abs(psi), std::abs(psi_prev));
        if (mag > 1e100 || (mag < 1e-100 && mag > 0.0)) {
            log_growth += std::log(mag);
            psi /= mag;
            psi_prev /= mag;
        }
    }
    log_growth += 0.5 * std::log(psi * psi + psi_prev * psi_prev);
    return static_cast<double>(n_sites) / log_growth;
}

}  // namespace oracles
