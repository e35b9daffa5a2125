#pragma once

#include <functional>
#include <vector>

#include "danse/model.hpp"

namespace danse {

struct IntegratorConfig {
    double dt = 0.05;       // production default; 0.01 for conservation tests
    int nl_iters = 10;      // max fixed-point iterations per step
    double nl_tol = 1e-10;  // per-step tolerance on max amplitude change

    void validate() const;
};

// Strictly increasing observation times.
struct RecordingSchedule {
    std::vector<double> times;

    void validate() const;
    // Logarithmic schedule, ppd points per decade, capped at max_samples.
    static RecordingSchedule logspaced(double t_min, double t_max,
                                       int ppd = 64, int max_samples = 400);
};

struct EvolveStats {
    long long steps = 0;
    long long retries = 0;       // step-size halvings after fixed-point failure
    long long nl_iterations = 0; // tridiagonal solves, all fixed-point passes
};

// One Crank-Nicolson step: (1 + i h/2 H[m]) c(t+h) = (1 - i h/2 H[m]) c(t),
// where the nonlinear diagonal of H is evaluated at the midpoint
// m = (c(t) + c*)/2 and c* is iterated to self-consistency from the c(t)
// predictor. With the same H on both sides the converged step is exactly
// norm-conserving for eta_a = 0 at any g, and norm-dissipating otherwise.
// The tridiagonal solve is forward elimination followed by back
// substitution. Keeps precomputed diagonals and scratch buffers so one
// instance can drive a whole evolution without allocating.
class Stepper {
  public:
    Stepper(const DisorderRealization& dis, const LatticeParams& params,
            const IntegratorConfig& cfg);

    // Advances state.t by h. Throws StepError (state untouched) if the
    // fixed-point iteration does not reach nl_tol within nl_iters.
    void advance(WaveState& state, double h);
    void advance(WaveState& state) { advance(state, cfg_.dt); }

    int last_iterations() const { return last_iters_; }

  private:
    void refresh_linear_factorization(double h);

    LatticeParams params_;
    IntegratorConfig cfg_;
    std::vector<double> v_;    // disorder + zero real absorber part
    std::vector<double> eta_;  // absorber magnitude per site (>= 0)
    int last_iters_ = 0;

    // scratch
    std::vector<cdouble> rhs_, iter_, next_, cp_, yw_;
    std::vector<double> diag_nl_;
    std::vector<double> inv_cached_re_, inv_cached_im_;  // g == 0 factorization
    double cached_h_ = -1.0;
};

// Convenience single step on a copy.
WaveState step(const WaveState& state, const DisorderRealization& dis,
               const LatticeParams& params, const IntegratorConfig& cfg);

using Observer = std::function<void(const WaveState&)>;

// Runs Crank-Nicolson steps to t_end, invoking every observer at each
// schedule time (the last step before a sample is shortened so the sample
// is hit exactly). On fixed-point failure the step is retried at half the
// size; the working step creeps back up to cfg.dt after a success streak.
WaveState evolve(WaveState state, const DisorderRealization& dis,
                 const LatticeParams& params, const IntegratorConfig& cfg,
                 const RecordingSchedule& schedule,
                 const std::vector<Observer>& observers, double t_end,
                 EvolveStats* stats = nullptr);

// Energy functional of the Hermitian part:
// sum v_n |c_n|^2 - sum (conj(c_n) c_{n+1} + c.c.) + (g/2) sum |c_n|^4.
double energy(const WaveState& state, const DisorderRealization& dis,
              const LatticeParams& params);

}  // namespace danse
