#include "danse/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "danse/numerics.hpp"

namespace danse {

double effective_absorber_distance(double L, double L0, double ell_0) {
    const double ell_a = 0.5 * (L / 2.0 - L0 / 4.0 - ell_0 / 5.0);
    if (!(ell_a > 0.0))
        throw GeometryError("effective_absorber_distance: box too small (ell_a = " +
                            std::to_string(ell_a) + ")");
    return ell_a;
}

double model_p_nonlinear(double t, double ell_eff, double t2, double ell_a) {
    if (!(ell_eff > 0.0) || !(t2 > 0.0) || !(ell_a > 0.0))
        throw ParameterError("model_p_nonlinear: parameters must be > 0");
    if (!(t > t2)) return 1.0;  // saturated regime
    const double x = 2.0 * ell_a / (ell_eff * std::log(t / t2) + 2.0 * ell_a);
    const double p = (2.0 / M_PI) * std::asin(std::sqrt(std::clamp(x, 0.0, 1.0)));
    return std::clamp(p, 0.0, 1.0);
}

double model_p_linear(double t, double ell_0, double t2, double ell_a) {
    return model_p_nonlinear(t, ell_0, t2, ell_a);
}

namespace {

struct WindowData {
    std::vector<double> t, p, w;  // w = least-squares weight per point
};

double sse(const WindowData& d, double ell_eff, double t2, double ell_a) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        const double r = d.w[i] * (model_p_nonlinear(d.t[i], ell_eff, t2, ell_a) - d.p[i]);
        s += r * r;
    }
    return s;
}

// Residuals and Jacobian w.r.t. theta = (log ell_eff, log t2). For points in
// the saturated branch (t <= t2) the model is flat; their gradient rows are
// zero, which the damped iteration tolerates.
void residuals_jacobian(const WindowData& d, double ell_eff, double t2, double ell_a,
                        bool fix_ell, std::vector<double>& r,
                        std::vector<std::array<double, 2>>& jac) {
    const std::size_t n = d.t.size();
    r.resize(n);
    jac.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = d.t[i];
        if (!(t > t2)) {
            r[i] = d.w[i] * (1.0 - d.p[i]);
            jac[i] = {0.0, 0.0};
            continue;
        }
        const double u = std::log(t / t2);
        const double den = ell_eff * u + 2.0 * ell_a;
        double x = 2.0 * ell_a / den;
        x = std::min(x, 1.0 - 1e-12);
        const double sq = std::sqrt(x);
        r[i] = d.w[i] * ((2.0 / M_PI) * std::asin(sq) - d.p[i]);
        // dp/dx = (1/pi) / (sqrt(1-x) sqrt(x))
        const double dpdx = (1.0 / M_PI) / (std::sqrt(1.0 - x) * sq);
        const double dxde = -2.0 * ell_a * u / (den * den);        // d x / d ell_eff
        const double dxdt2 = 2.0 * ell_a * ell_eff / (den * den);  // d x / d log t2 * 1
        // chain to log parameters: d/dlog(ell) = ell * d/dell; u depends on
        // log t2 directly with du/dlog t2 = -1.
        jac[i][0] = fix_ell ? 0.0 : d.w[i] * dpdx * dxde * ell_eff;
        jac[i][1] = d.w[i] * dpdx * dxdt2;
    }
}

struct GnOutcome {
    double ell_eff, t2, obj;
    bool converged;
};

GnOutcome gauss_newton(const WindowData& d, double ell0, double t20, double ell_a,
                       bool fix_ell) {
    double le = std::log(ell0), lt = std::log(t20);
    double obj = sse(d, ell0, t20, ell_a);
    std::vector<double> r;
    std::vector<std::array<double, 2>> jac;

    auto grad_norm = [&](double le_, double lt_) {
        residuals_jacobian(d, std::exp(le_), std::exp(lt_), ell_a, fix_ell, r, jac);
        double g0 = 0, g1 = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            g0 += jac[i][0] * r[i];
            g1 += jac[i][1] * r[i];
        }
        return std::sqrt(g0 * g0 + g1 * g1);
    };

    const double grad0 = grad_norm(le, lt);
    const double grad_target = std::max(1e-8 * grad0, 1e-300);
    if (grad0 == 0.0) return {std::exp(le), std::exp(lt), obj, true};

    double lambda = 1e-3;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        residuals_jacobian(d, std::exp(le), std::exp(lt), ell_a, fix_ell, r, jac);
        double a00 = 0, a01 = 0, a11 = 0, g0 = 0, g1 = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            a00 += jac[i][0] * jac[i][0];
            a01 += jac[i][0] * jac[i][1];
            a11 += jac[i][1] * jac[i][1];
            g0 += jac[i][0] * r[i];
            g1 += jac[i][1] * r[i];
        }
        if (std::sqrt(g0 * g0 + g1 * g1) <= grad_target) {
            converged = true;
            break;
        }
        bool stepped = false;
        for (int damp = 0; damp < 40; ++damp) {
            const double d00 = a00 * (1.0 + lambda) + (fix_ell ? 1.0 : 0.0);
            const double d11 = a11 * (1.0 + lambda);
            const double det = d00 * d11 - a01 * a01;
            if (det == 0.0 || !std::isfinite(det)) break;
            const double s0 = fix_ell ? 0.0 : (-g0 * d11 + g1 * a01) / det;
            const double s1 = fix_ell ? -g1 / d11 : (-g1 * d00 + g0 * a01) / det;
            const double le_new = le + s0, lt_new = lt + s1;
            if (!std::isfinite(le_new) || !std::isfinite(lt_new)) {
                lambda *= 10.0;
                continue;
            }
            const double obj_new = sse(d, std::exp(le_new), std::exp(lt_new), ell_a);
            if (obj_new < obj) {
                le = le_new;
                lt = lt_new;
                obj = obj_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            converged = grad_norm(le, lt) <= grad_target;
            break;
        }
    }
    if (!converged) converged = grad_norm(le, lt) <= grad_target;
    return {std::exp(le), std::exp(lt), obj, converged};
}

// Coarse log-grid scan followed by Gauss-Newton refinement.
GnOutcome fit_window(const WindowData& d, double ell_a,
                     const std::optional<double>& fix_ell_eff) {
    const double t_lo = d.t.front(), t_hi = d.t.back();
    const int n_grid = 56;
    std::vector<double> t2_grid(n_grid), ell_grid;
    for (int k = 0; k < n_grid; ++k)
        t2_grid[k] = (t_lo / 1000.0) * std::pow(1000.0 * t_hi / t_lo,
                                                static_cast<double>(k) / (n_grid - 1));
    if (fix_ell_eff) {
        ell_grid = {*fix_ell_eff};
    } else {
        ell_grid.resize(n_grid);
        for (int k = 0; k < n_grid; ++k)
            ell_grid[k] = 0.3 * std::pow(1000.0 / 0.3, static_cast<double>(k) / (n_grid - 1));
    }

    double best = std::numeric_limits<double>::infinity();
    double best_ell = ell_grid.front(), best_t2 = t2_grid.front();
    for (double ell : ell_grid)
        for (double t2 : t2_grid) {
            const double s = sse(d, ell, t2, ell_a);
            if (s < best) {
                best = s;
                best_ell = ell;
                best_t2 = t2;
            }
        }
    GnOutcome out = gauss_newton(d, best_ell, best_t2, ell_a, fix_ell_eff.has_value());
    if (out.obj > best) {  // never worse than the grid
        out.ell_eff = best_ell;
        out.t2 = best_t2;
        out.obj = best;
        out.converged = false;
    }
    return out;
}

}  // namespace

FitResult fit_survival(const SurvivalTrace& trace, double ell_a, const FitOptions& opts) {
    if (!(ell_a > 0.0)) throw ParameterError("fit_survival: ell_a must be > 0");
    if (trace.t.size() != trace.p_mean.size() || trace.t.size() != trace.p_stderr.size())
        throw ParameterError("fit_survival: ragged trace");

    FitResult result;
    result.ell_a = ell_a;

    // Quasi-localized regime: no measurable losses, Eq.-style fit is
    // unidentifiable. Report the linear localization length, flagged.
    const bool saturated =
        std::all_of(trace.p_mean.begin(), trace.p_mean.end(),
                    [&](double p) { return p >= opts.p_ceiling; });
    if (saturated) {
        const double W = trace.spec.params.W;
        result.no_loss = true;
        result.converged = true;
        result.ell_eff = W > 0.0 ? 96.0 / (W * W) : std::numeric_limits<double>::infinity();
        result.t2 = std::numeric_limits<double>::infinity();
        result.t_min = trace.t.front();
        result.t_max = trace.t.back();
        return result;
    }

    bool unit_weights = true;
    for (double se : trace.p_stderr)
        if (se > 0.0) unit_weights = false;

    auto build_window = [&](double t_floor) {
        WindowData d;
        for (std::size_t i = 0; i < trace.t.size(); ++i) {
            const double p = trace.p_mean[i];
            if (trace.t[i] <= t_floor) continue;
            if (p <= opts.p_floor || p >= opts.p_ceiling) continue;
            d.t.push_back(trace.t[i]);
            d.p.push_back(p);
            d.w.push_back(unit_weights ? 1.0 : 1.0 / std::max(trace.p_stderr[i], 1e-8));
        }
        return d;
    };

    WindowData window = build_window(0.0);
    if (static_cast<int>(window.t.size()) < opts.min_points)
        throw FitError("fit_survival: fewer than " + std::to_string(opts.min_points) +
                       " usable points between p = " + std::to_string(opts.p_floor) +
                       " and " + std::to_string(opts.p_ceiling));

    GnOutcome out = fit_window(window, ell_a, opts.fix_ell_eff);

    // Enforce the asymptotic validity condition t >> t2 by refitting on
    // t > 10 t2 until the estimate settles.
    for (int round = 0; round < 10; ++round) {
        WindowData tightened = build_window(10.0 * out.t2);
        if (static_cast<int>(tightened.t.size()) < opts.min_points) break;
        if (tightened.t.size() == window.t.size()) break;
        const double prev_t2 = out.t2;
        window = std::move(tightened);
        out = fit_window(window, ell_a, opts.fix_ell_eff);
        if (std::abs(out.t2 - prev_t2) < 0.05 * prev_t2) break;
    }

    result.ell_eff = out.ell_eff;
    result.t2 = out.t2;
    result.converged = out.converged;
    result.t_min = window.t.front();
    result.t_max = window.t.back();
    result.n_points = static_cast<int>(window.t.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < window.t.size(); ++i) {
        const double diff =
            model_p_nonlinear(window.t[i], out.ell_eff, out.t2, ell_a) - window.p[i];
        ss += diff * diff;
    }
    result.residual = std::sqrt(ss / window.t.size());
    return result;
}

ScaledPoint scale_point(double g, double W, int L0, double ell_eff) {
    if (L0 < 1) throw ParameterError("scale_point: L0 must be >= 1");
    const double f = std::pow(static_cast<double>(L0), -0.75);
    return ScaledPoint{g * f, ell_eff * f, g, W, L0};
}

std::pair<double, double> unscale_point(const ScaledPoint& sp) {
    const double f = std::pow(static_cast<double>(sp.L0), 0.75);
    return {sp.g_tilde * f, sp.ell_tilde * f};
}

CollapseReport collapse_quality(const std::vector<ScaledPoint>& points, int n_bins) {
    if (n_bins < 1) throw ParameterError("collapse_quality: n_bins must be >= 1");
    std::map<int, std::vector<std::pair<double, double>>> groups;  // L0 -> (g~, l~)
    for (const auto& p : points) groups[p.L0].emplace_back(p.g_tilde, p.ell_tilde);

    std::vector<std::pair<int, std::vector<std::pair<double, double>>>> usable;
    for (auto& [l0, pts] : groups) {
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end(),
                              [](auto& a, auto& b) { return a.first == b.first; }),
                  pts.end());
        if (pts.size() >= 2) usable.emplace_back(l0, pts);
    }
    if (usable.size() < 2)
        throw ParameterError("collapse_quality: need >= 2 L0 groups with >= 2 points");

    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (const auto& [l0, pts] : usable) {
        lo = std::max(lo, pts.front().first);
        hi = std::min(hi, pts.back().first);
    }
    if (!(hi > lo))
        throw ParameterError("collapse_quality: L0 groups share no g_tilde range");

    CollapseReport rep;
    rep.n_groups = static_cast<int>(usable.size());
    for (int b = 0; b < n_bins; ++b) {
        const double frac = n_bins == 1 ? 0.5 : static_cast<double>(b) / (n_bins - 1);
        rep.g_tilde_bins.push_back(lo * std::pow(hi / lo, frac));
    }

    for (double gb : rep.g_tilde_bins) {
        std::vector<double> scaled, unscaled;
        for (const auto& [l0, pts] : usable) {
            std::vector<double> xs, ys;
            for (const auto& [gt, lt] : pts) {
                xs.push_back(std::log(gt));
                ys.push_back(std::log(lt));
            }
            const double lt = std::exp(interp_linear(xs, ys, std::log(gb)));
            scaled.push_back(lt);
            // Contrast statistic: the same matched points, undone scaling.
            unscaled.push_back(lt * std::pow(static_cast<double>(l0), 0.75));
        }
        rep.cv_scaled.push_back(sample_stddev(scaled) / mean(scaled));
        rep.cv_unscaled.push_back(sample_stddev(unscaled) / mean(unscaled));
    }
    return rep;
}

CrossoverResult detect_crossovers(std::vector<std::pair<double, double>> curve) {
    CrossoverResult res;
    if (curve.empty()) return res;
    std::sort(curve.begin(), curve.end());

    // Plateau: mean over the lowest half decade of g_tilde.
    const double plateau_edge = curve.front().first * std::sqrt(10.0);
    std::vector<double> low;
    for (const auto& [g, l] : curve)
        if (g <= plateau_edge) low.push_back(l);
    res.plateau = mean(low);

    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].second > 1.2 * res.plateau) {
            res.has_g_c = true;
            res.g_c = curve[i].first;
            res.g_c_unc = i > 0 ? curve[i].first - curve[i - 1].first : curve[i].first;
            break;
        }
    }

    std::size_t imax = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].second > curve[imax].second) imax = i;
    if (imax + 1 < curve.size() && curve.size() >= 2 && imax > 0) {
        res.has_g_st = true;
        res.g_st = curve[imax].first;
        const double left = curve[imax].first - curve[imax - 1].first;
        const double right = curve[imax + 1].first - curve[imax].first;
        res.g_st_unc = std::max(left, right);
    }
    return res;
}

}  // namespace danse
