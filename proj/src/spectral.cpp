#include "danse/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "danse/numerics.hpp"

namespace danse {

namespace {

// Wing decay length from the slope of log|psi| against distance from the
// center, both wings pooled, near-zero tail excluded.
double estimate_ell(const std::vector<double>& psi, double n_center, int box_half) {
    std::vector<double> xs, ys;
    xs.reserve(psi.size());
    ys.reserve(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double a2 = psi[j] * psi[j];
        if (a2 <= 1e-12) continue;
        const double n = static_cast<double>(j) - box_half;
        xs.push_back(std::abs(n - n_center));
        ys.push_back(std::log(std::abs(psi[j])));
    }
    if (xs.size() < 2) return std::numeric_limits<double>::infinity();
    const LinearFit f = linear_fit(xs, ys);
    if (f.slope >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / f.slope;
}

}  // namespace

std::vector<EigenPair> diagonalize_anderson(const DisorderRealization& dis,
                                            const LatticeParams& params) {
    params.validate();
    if (dis.v.size() != static_cast<std::size_t>(params.grid_size()))
        throw GeometryError("diagonalize_anderson: disorder/grid size mismatch");
    const int L = params.L;
    const int bh = params.box_half();

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
    for (int j = 0; j < L; ++j) {
        h(j, j) = dis.v[params.index_of(j - bh)];
        if (j + 1 < L) {
            h(j, j + 1) = -1.0;
            h(j + 1, j) = -1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);

    std::vector<EigenPair> pairs(L);
    for (int k = 0; k < L; ++k) {
        EigenPair& p = pairs[k];
        p.E = solver.eigenvalues()(k);
        p.psi.resize(L);
        double center = 0.0;
        for (int j = 0; j < L; ++j) {
            p.psi[j] = solver.eigenvectors()(j, k);
            center += (j - bh) * p.psi[j] * p.psi[j];
        }
        p.n_center = center;
        p.ell = estimate_ell(p.psi, p.n_center, bh);
    }
    return pairs;  // SelfAdjointEigenSolver already sorts ascending
}

double band_position(double E) {
    const double x = std::clamp(-E / 2.0, -1.0, 1.0);
    return std::acos(x) - M_PI / 2.0;
}

LocalizationProfile mean_localization_profile(
    const std::vector<DisorderRealization>& ensemble, const LatticeParams& params,
    double e_min, double e_max) {
    params.validate();
    if (ensemble.empty())
        throw ParameterError("mean_localization_profile: empty ensemble");

    // Keep only states whose wings fit inside the box over the fit range.
    // The envelope is the geometric mean of |psi|^2: the arithmetic mean is
    // dominated by rare extended tails and overestimates the decay length
    // once the range exceeds a couple of localization lengths.
    const int wing = params.L / 3;
    const int bh = params.box_half();
    std::vector<double> acc(2 * wing + 1, 0.0);
    int n_states = 0;

    for (const auto& dis : ensemble) {
        for (const auto& pair : diagonalize_anderson(dis, params)) {
            if (pair.E < e_min || pair.E > e_max) continue;
            const int nc = static_cast<int>(std::lround(pair.n_center));
            if (std::abs(nc) > bh - wing) continue;
            for (int d = -wing; d <= wing; ++d) {
                const int j = nc + d + bh;
                acc[d + wing] += std::log(std::max(pair.psi[j] * pair.psi[j], 1e-300));
            }
            ++n_states;
        }
    }
    if (n_states == 0)
        throw FitError("mean_localization_profile: no eigenstates in window");

    LocalizationProfile prof;
    prof.n_states = n_states;
    prof.offset.resize(acc.size());
    prof.mean_psi2.resize(acc.size());
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < acc.size(); ++k) {
        const int d = static_cast<int>(k) - wing;
        prof.offset[k] = d;
        prof.mean_psi2[k] = std::exp(acc[k] / n_states);
        if (prof.mean_psi2[k] > 1e-12) {
            xs.push_back(std::abs(static_cast<double>(d)));
            ys.push_back(std::log(prof.mean_psi2[k]));
        }
    }
    const LinearFit f = linear_fit(xs, ys);
    prof.ell = (f.slope < 0.0) ? -2.0 / f.slope : std::numeric_limits<double>::infinity();
    return prof;
}

std::vector<double> eigenstate_decay_trace(const EigenPair& pair,
                                           const DisorderRealization& dis,
                                           const LatticeParams& params,
                                           const IntegratorConfig& cfg,
                                           const RecordingSchedule& schedule) {
    if (params.g != 0.0)
        throw ParameterError("eigenstate_decay_trace: requires g = 0");
    if (pair.psi.size() != static_cast<std::size_t>(params.L))
        throw GeometryError("eigenstate_decay_trace: eigenvector/box size mismatch");

    WaveState state;
    state.t = 0.0;
    state.c.assign(params.grid_size(), cdouble{0.0, 0.0});
    const int bh = params.box_half();
    for (int j = 0; j < params.L; ++j)
        state.c[params.index_of(j - bh)] = pair.psi[j];

    std::vector<double> alphas;
    alphas.reserve(schedule.times.size());
    Observer project = [&](const WaveState& s) {
        cdouble overlap{0.0, 0.0};
        for (int j = 0; j < params.L; ++j)
            overlap += pair.psi[j] * s.c[params.index_of(j - bh)];
        alphas.push_back(std::abs(overlap));
    };
    const double t_end = schedule.times.empty() ? 0.0 : schedule.times.back();
    evolve(std::move(state), dis, params, cfg, schedule, {project}, t_end);
    return alphas;
}

double fit_decay_time(const std::vector<double>& times,
                      const std::vector<double>& alphas) {
    if (times.size() != alphas.size() || times.size() < 2)
        throw FitError("fit_decay_time: need >= 2 trace points");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(alphas[i] > 0.0))
            throw FitError("fit_decay_time: trace must be strictly positive");
        if (alphas[i] >= 0.1 && alphas[i] <= 0.9) {
            xs.push_back(times[i]);
            ys.push_back(std::log(alphas[i]));
        }
    }
    if (xs.size() < 2) {
        // Window empty: either the state barely decayed or it collapsed
        // between two samples. Fit whatever is there.
        xs.assign(times.begin(), times.end());
        ys.clear();
        for (double a : alphas) ys.push_back(std::log(a));
    }
    const LinearFit f = linear_fit(xs, ys);
    if (f.slope >= 0.0) return std::numeric_limits<double>::infinity();
    return -0.5 / f.slope;
}

double fit_tnu_law(const std::vector<std::pair<double, double>>& tnu_ell_pairs,
                   double ell_a, double ell_0) {
    if (!(ell_a > 0.0) || !(ell_0 > 0.0))
        throw ParameterError("fit_tnu_law: ell_a and ell_0 must be > 0");
    std::vector<double> residuals;
    double ell_first = -1.0;
    bool degenerate = true;
    for (const auto& [t_nu, ell_nu] : tnu_ell_pairs) {
        if (!std::isfinite(t_nu) || !(t_nu > 0.0) || !(ell_nu > 0.0)) continue;
        if (ell_first < 0.0)
            ell_first = ell_nu;
        else if (std::abs(ell_nu - ell_first) > 1e-9 * ell_first)
            degenerate = false;
        residuals.push_back(std::log(t_nu) - 2.0 * ell_a * (1.0 / ell_nu - 1.0 / ell_0));
    }
    if (residuals.size() < 5)
        throw FitError("fit_tnu_law: need >= 5 finite (t_nu, ell_nu) pairs");
    if (degenerate)
        throw FitError("fit_tnu_law: all ell_nu identical, law unconstrained");
    return std::exp(mean(residuals));
}

}  // namespace danse
