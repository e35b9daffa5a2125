#pragma once

#include <vector>

#include "danse/integrator.hpp"
#include "danse/model.hpp"

namespace danse {

// One eigenstate of the linear (g = 0) Hermitian box Hamiltonian.
struct EigenPair {
    double E = 0.0;           // eigenvalue, units of the hopping
    std::vector<double> psi;  // real amplitudes over box sites, unit norm
    double n_center = 0.0;    // norm-weighted mean position
    double ell = 0.0;         // wing decay length estimate, sites
};

// Full spectrum of the box Hamiltonian (hard wall at the box edges,
// absorber and nonlinearity ignored), sorted by energy.
std::vector<EigenPair> diagonalize_anderson(const DisorderRealization& dis,
                                            const LatticeParams& params);

// Band-position index: nu = arccos(-E/2) - pi/2, clamped to the band edges.
double band_position(double E);

struct LocalizationProfile {
    std::vector<int> offset;        // site offset from the localization center
    std::vector<double> mean_psi2;  // ensemble-averaged |psi|^2
    double ell = 0.0;               // exponential decay length of the average
    int n_states = 0;
};

// Aligns eigenstates from an energy window on their centers, takes the
// geometric mean of |psi|^2 over realizations and fits the exponential
// envelope. Only states centered far enough from the box edges contribute,
// so the averaged wings are never truncated.
LocalizationProfile mean_localization_profile(
    const std::vector<DisorderRealization>& ensemble, const LatticeParams& params,
    double e_min, double e_max);

// |<nu|psi(t)>| at each schedule time for the eigenstate evolved under the
// full non-Hermitian Hamiltonian (g must be 0).
std::vector<double> eigenstate_decay_trace(const EigenPair& pair,
                                           const DisorderRealization& dis,
                                           const LatticeParams& params,
                                           const IntegratorConfig& cfg,
                                           const RecordingSchedule& schedule);

// Attenuation time from |alpha(t)| = |alpha(0)| exp(-t/2 t_nu), fitted over
// the span where |alpha| is in [0.1, 0.9]. Returns +infinity for a
// non-decaying trace.
double fit_decay_time(const std::vector<double>& times,
                      const std::vector<double>& alphas);

// Activation time t2 from the law t_nu = t2 exp[2 ell_a (1/ell_nu - 1/ell_0)],
// least squares in log space with the slope pinned to 2 ell_a.
double fit_tnu_law(const std::vector<std::pair<double, double>>& tnu_ell_pairs,
                   double ell_a, double ell_0);

}  // namespace danse
