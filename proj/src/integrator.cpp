#include "danse/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace danse {

namespace {

// a * b without libgcc's __divdc3/NaN checks; the hot loops below only ever
// divide by forward-elimination pivots, which stay away from zero because the
// matrix is strongly diagonally dominant for any reasonable h.
inline cdouble cmul(cdouble a, cdouble b) {
    return {a.real() * b.real() - a.imag() * b.imag(),
            a.real() * b.imag() + a.imag() * b.real()};
}

inline cdouble reciprocal(cdouble z) {
    const double s = 1.0 / (z.real() * z.real() + z.imag() * z.imag());
    return {z.real() * s, -z.imag() * s};
}

// (-i s) * z
inline cdouble mul_minus_is(double s, cdouble z) {
    return {s * z.imag(), -s * z.real()};
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw ParameterError("IntegratorConfig: dt must be > 0");
    if (nl_iters < 1) throw ParameterError("IntegratorConfig: nl_iters must be >= 1");
    if (!(nl_tol > 0.0)) throw ParameterError("IntegratorConfig: nl_tol must be > 0");
}

void RecordingSchedule::validate() const {
    double prev = 0.0;
    for (double t : times) {
        if (!(t > prev))
            throw ParameterError("RecordingSchedule: times must be positive, sorted, unique");
        prev = t;
    }
}

RecordingSchedule RecordingSchedule::logspaced(double t_min, double t_max,
                                               int ppd, int max_samples) {
    if (!(t_min > 0.0) || !(t_max >= t_min))
        throw ParameterError("RecordingSchedule: need 0 < t_min <= t_max");
    if (ppd < 1 || max_samples < 1)
        throw ParameterError("RecordingSchedule: ppd and max_samples must be >= 1");
    RecordingSchedule s;
    if (t_min == t_max) {
        s.times = {t_min};
        return s;
    }
    const double decades = std::log10(t_max / t_min);
    int n = static_cast<int>(std::ceil(ppd * decades)) + 1;
    n = std::clamp(n, 2, max_samples);
    s.times.resize(n);
    for (int k = 0; k < n; ++k)
        s.times[k] = t_min * std::pow(t_max / t_min, static_cast<double>(k) / (n - 1));
    s.times.back() = t_max;
    s.validate();
    return s;
}

Stepper::Stepper(const DisorderRealization& dis, const LatticeParams& params,
                 const IntegratorConfig& cfg)
    : params_(params), cfg_(cfg) {
    params.validate();
    cfg.validate();
    const int m = params.grid_size();
    if (dis.v.size() != static_cast<std::size_t>(m))
        throw GeometryError("Stepper: disorder/grid size mismatch");
    v_ = dis.v;
    eta_.assign(m, 0.0);
    const int edge = params.box_half();
    for (int i = 0; i < m; ++i) {
        const int n = params.site_of(i);
        if (std::abs(n) > edge)
            eta_[i] = params.eta_a * std::exp((std::abs(n) - edge) / params.n_c);
    }
    rhs_.resize(m);
    iter_.resize(m);
    next_.resize(m);
    cp_.resize(m);
    yw_.resize(m);
    diag_nl_.resize(m);
    inv_cached_re_.resize(m);
    inv_cached_im_.resize(m);
}

void Stepper::refresh_linear_factorization(double h) {
    const int m = params_.grid_size();
    const double s = 0.5 * h;
    // Forward-elimination pivots for the constant (g = 0) matrix:
    //   d_i = (1 + s eta_i) + i s v_i,  off-diagonal a = -i s.
    // cp_i = a / pivot_i is reused by every subsequent solve at this h.
    cdouble cp_prev{0.0, 0.0};
    for (int i = 0; i < m; ++i) {
        cdouble d{1.0 + s * eta_[i], s * v_[i]};
        if (i > 0) d -= mul_minus_is(s, cp_prev);
        const cdouble inv = reciprocal(d);
        inv_cached_re_[i] = inv.real();
        inv_cached_im_[i] = inv.imag();
        cp_prev = mul_minus_is(s, inv);
        cp_[i] = cp_prev;
    }
    cached_h_ = h;
}

void Stepper::advance(WaveState& state, double h) {
    const int m = params_.grid_size();
    if (state.c.size() != static_cast<std::size_t>(m))
        throw GeometryError("Stepper: state/grid size mismatch");
    if (!(h > 0.0)) throw ParameterError("Stepper: step size must be > 0");

    const double s = 0.5 * h;
    const double g = params_.g;
    const cdouble* c = state.c.data();

    if (g == 0.0) {
        // rhs_i = c_i - i s (H c)_i
        for (int i = 0; i < m; ++i) {
            cdouble hc = cmul(cdouble{v_[i], -eta_[i]}, c[i]);
            if (i > 0) hc -= c[i - 1];
            if (i + 1 < m) hc -= c[i + 1];
            rhs_[i] = c[i] + mul_minus_is(s, hc);
        }
        // Linear system is state-independent: factorize once per step size,
        // then a single substitution pass per step.
        if (cached_h_ != h) refresh_linear_factorization(h);
        cdouble y_prev{0.0, 0.0};
        for (int i = 0; i < m; ++i) {
            cdouble num = rhs_[i];
            if (i > 0) num -= mul_minus_is(s, y_prev);
            y_prev = cmul(num, cdouble{inv_cached_re_[i], inv_cached_im_[i]});
            yw_[i] = y_prev;
        }
        cdouble x_next = yw_[m - 1];
        next_[m - 1] = x_next;
        for (int i = m - 2; i >= 0; --i) {
            x_next = yw_[i] - cmul(cp_[i], x_next);
            next_[i] = x_next;
        }
        state.c.swap(next_);
        state.t += h;
        last_iters_ = 1;
        return;
    }

    // Fixed point on the nonlinear diagonal, predictor c* = c(t). The
    // diagonal is evaluated at the iterated midpoint (c(t) + c*)/2 on both
    // sides of the Cayley form, which keeps the converged step exactly
    // norm-conserving when the absorber is off.
    std::copy(state.c.begin(), state.c.end(), iter_.begin());
    double maxdiff = 0.0;
    for (int it = 0; it < cfg_.nl_iters; ++it) {
        for (int i = 0; i < m; ++i) {
            const cdouble mid = 0.5 * (c[i] + iter_[i]);
            const double nl = v_[i] + g * std::norm(mid);
            cdouble hc = cmul(cdouble{nl, -eta_[i]}, c[i]);
            if (i > 0) hc -= c[i - 1];
            if (i + 1 < m) hc -= c[i + 1];
            rhs_[i] = c[i] + mul_minus_is(s, hc);
            diag_nl_[i] = nl;
        }
        // Solve (1 + i s H[mid]) next_ = rhs_
        cdouble cp_prev{0.0, 0.0};
        cdouble y_prev{0.0, 0.0};
        for (int i = 0; i < m; ++i) {
            cdouble d{1.0 + s * eta_[i], s * diag_nl_[i]};
            cdouble num = rhs_[i];
            if (i > 0) {
                d -= mul_minus_is(s, cp_prev);
                num -= mul_minus_is(s, y_prev);
            }
            const cdouble inv = reciprocal(d);
            cp_prev = mul_minus_is(s, inv);
            cp_[i] = cp_prev;
            y_prev = cmul(num, inv);
            yw_[i] = y_prev;
        }
        cdouble x_next = yw_[m - 1];
        next_[m - 1] = x_next;
        for (int i = m - 2; i >= 0; --i) {
            x_next = yw_[i] - cmul(cp_[i], x_next);
            next_[i] = x_next;
        }
        maxdiff = 0.0;
        for (int i = 0; i < m; ++i) {
            const double d2 = std::norm(next_[i] - iter_[i]);
            if (d2 > maxdiff) maxdiff = d2;
        }
        maxdiff = std::sqrt(maxdiff);
        iter_.swap(next_);
        if (maxdiff < cfg_.nl_tol) {
            state.c.swap(iter_);
            state.t += h;
            last_iters_ = it + 1;
            return;
        }
    }
    throw StepError("Crank-Nicolson fixed point did not converge (residual " +
                        std::to_string(maxdiff) + " at t = " + std::to_string(state.t) + ")",
                    maxdiff, state.t);
}

WaveState step(const WaveState& state, const DisorderRealization& dis,
               const LatticeParams& params, const IntegratorConfig& cfg) {
    WaveState out = state;
    Stepper stepper(dis, params, cfg);
    stepper.advance(out);
    return out;
}

WaveState evolve(WaveState state, const DisorderRealization& dis,
                 const LatticeParams& params, const IntegratorConfig& cfg,
                 const RecordingSchedule& schedule,
                 const std::vector<Observer>& observers, double t_end,
                 EvolveStats* stats) {
    cfg.validate();
    schedule.validate();
    if (!schedule.times.empty() && schedule.times.back() > t_end * (1.0 + 1e-12))
        throw ParameterError("evolve: schedule extends past t_end");

    Stepper stepper(dis, params, cfg);
    const double h_floor = cfg.dt * 0x1.0p-24;
    double h = cfg.dt;
    long long streak = 0;

    auto run_to = [&](double target) {
        while (target - state.t > 1e-12 * std::max(1.0, target)) {
            const double hh = std::min(h, target - state.t);
            try {
                stepper.advance(state, hh);
                if (stats) {
                    ++stats->steps;
                    stats->nl_iterations += stepper.last_iterations();
                }
                if (++streak >= 64 && h < cfg.dt) {
                    h = std::min(cfg.dt, 2.0 * h);
                    streak = 0;
                }
            } catch (const StepError& e) {
                h = 0.5 * hh;
                streak = 0;
                if (stats) ++stats->retries;
                if (h < h_floor)
                    throw StepError("evolve: step size underflow after repeated "
                                    "fixed-point failures at t = " +
                                        std::to_string(state.t),
                                    e.residual, state.t);
            }
        }
        state.t = target;  // absorb roundoff so samples are exact
    };

    for (double ts : schedule.times) {
        if (ts < state.t) continue;
        run_to(ts);
        for (const auto& obs : observers) obs(state);
    }
    if (t_end > state.t) run_to(t_end);
    return state;
}

double energy(const WaveState& state, const DisorderRealization& dis,
              const LatticeParams& params) {
    const std::size_t m = state.c.size();
    if (dis.v.size() != m || m != static_cast<std::size_t>(params.grid_size()))
        throw GeometryError("energy: state/disorder/grid size mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double a2 = std::norm(state.c[i]);
        e += dis.v[i] * a2 + 0.5 * params.g * a2 * a2;
        if (i + 1 < m)
            e -= 2.0 * (std::conj(state.c[i]) * state.c[i + 1]).real();
    }
    return e;
}

}  // namespace danse
