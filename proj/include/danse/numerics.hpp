#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "danse/errors.hpp"

namespace danse {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

// Ordinary least squares y = a + b x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw FitError("linear_fit: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw FitError("linear_fit: degenerate abscissa");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    f.n = x.size();
    return f;
}

inline double mean(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator).
inline double sample_stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Piecewise-linear interpolation of (x, y) at xq; x must be strictly
// increasing. Query outside the range throws.
inline double interp_linear(std::span<const double> x, std::span<const double> y,
                            double xq) {
    if (x.size() != y.size() || x.size() < 2)
        throw FitError("interp_linear: need >= 2 nodes");
    if (xq < x.front() || xq > x.back())
        throw FitError("interp_linear: query outside node range");
    std::size_t hi = 1;
    while (hi + 1 < x.size() && x[hi] < xq) ++hi;
    const double w = (xq - x[hi - 1]) / (x[hi] - x[hi - 1]);
    return y[hi - 1] + w * (y[hi] - y[hi - 1]);
}

}  // namespace danse
