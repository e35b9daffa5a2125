#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "danse/ensemble.hpp"

namespace danse {

struct FitResult {
    double ell_eff = 0.0;  // effective wavepacket length, sites
    double t2 = 0.0;       // activation time
    double ell_a = 0.0;    // effective absorber distance used
    double residual = 0.0; // rms of (model - data) over the fit window
    double t_min = 0.0;    // fit window
    double t_max = 0.0;
    int n_points = 0;
    bool converged = false;
    bool no_loss = false;  // trace saturated near 1; ell_eff reported as ell_0
};

// A fit result together with the sweep point that produced it.
struct FitRow {
    double g = 0.0;
    double W = 0.0;
    int L0 = 0;
    FitResult fit;
};

struct ScaledPoint {
    double g_tilde = 0.0;    // g  * L0^(-3/4)
    double ell_tilde = 0.0;  // ell_eff * L0^(-3/4)
    double g = 0.0;
    double W = 0.0;
    int L0 = 0;
};

// ell_a = (L/2 - L0/4 - ell_0/5) / 2. Throws GeometryError when the box is
// too small for this initial width / localization length.
double effective_absorber_distance(double L, double L0, double ell_0);

// p(t) = (2/pi) asin(sqrt(2 ell_a / (ell_eff log(t/t2) + 2 ell_a))) for
// t > t2, 1 in the saturated regime, clamped to [0, 1].
double model_p_nonlinear(double t, double ell_eff, double t2, double ell_a);

// Same law with ell_eff pinned to the linear localization length ell_0.
double model_p_linear(double t, double ell_0, double t2, double ell_a);

struct FitOptions {
    std::optional<double> fix_ell_eff;  // single-parameter (t2 only) fit
    double p_floor = 0.02;              // usable data band
    double p_ceiling = 0.98;
    int min_points = 10;
};

// Weighted least squares of the survival model over the trace: coarse
// log-grid search, then damped Gauss-Newton in log parameters. The window is
// tightened iteratively to t > 10 t2 until the t2 estimate settles. A trace
// that never drops below p_ceiling is returned as a flagged no-loss result
// with ell_eff = 96 W^-2.
FitResult fit_survival(const SurvivalTrace& trace, double ell_a,
                       const FitOptions& opts = {});

ScaledPoint scale_point(double g, double W, int L0, double ell_eff);
// Inverse transform; scale_point then unscale_point is the identity.
std::pair<double, double> unscale_point(const ScaledPoint& sp);

struct CollapseReport {
    std::vector<double> g_tilde_bins;  // common bin centers, log spaced
    std::vector<double> cv_scaled;     // stddev/mean of ell_tilde across L0
    std::vector<double> cv_unscaled;   // same statistic on ell_eff at matched g
    int n_groups = 0;
};

// Interpolates each L0 group's curve onto common g_tilde bins (log-log) and
// measures the cross-group dispersion there, scaled and unscaled.
CollapseReport collapse_quality(const std::vector<ScaledPoint>& points,
                                int n_bins = 12);

struct CrossoverResult {
    bool has_g_c = false;
    double g_c = 0.0;       // quasi-localized -> chaotic: first 20% rise over plateau
    double g_c_unc = 0.0;   // bin-width uncertainty
    bool has_g_st = false;
    double g_st = 0.0;      // chaotic -> self-trapping: curve maximum
    double g_st_unc = 0.0;
    double plateau = 0.0;   // small-g level the rise is measured against
};

// Curve points are (g_tilde, ell_tilde); sorted internally.
CrossoverResult detect_crossovers(std::vector<std::pair<double, double>> curve);

}  // namespace danse
