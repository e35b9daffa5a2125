#include "danse/observables.hpp"

#include <cmath>

namespace danse {

namespace {

void check_grid(const WaveState& state, const LatticeParams& params) {
    if (state.c.size() != static_cast<std::size_t>(params.grid_size()))
        throw GeometryError("observable: state/grid size mismatch");
}

}  // namespace

double survival_probability(const WaveState& state, const LatticeParams& params) {
    check_grid(state, params);
    double p = 0.0;
    for (int n = -params.box_half(); n <= params.box_half(); ++n)
        p += std::norm(state.c[params.index_of(n)]);
    return p;
}

double participation_number(const WaveState& state, const LatticeParams& params) {
    check_grid(state, params);
    double norm2 = 0.0, quartic = 0.0;
    for (int n = -params.box_half(); n <= params.box_half(); ++n) {
        const double a2 = std::norm(state.c[params.index_of(n)]);
        norm2 += a2;
        quartic += a2 * a2;
    }
    if (norm2 <= 0.0)
        throw ParameterError("participation_number: zero in-box state");
    // Renormalize so late-time values stay interpretable under absorption.
    return norm2 * norm2 / quartic;
}

double second_moment(const WaveState& state, const LatticeParams& params) {
    check_grid(state, params);
    double norm2 = 0.0, weighted = 0.0;
    for (int n = -params.box_half(); n <= params.box_half(); ++n) {
        const double a2 = std::norm(state.c[params.index_of(n)]);
        norm2 += a2;
        weighted += static_cast<double>(n) * n * a2;
    }
    if (norm2 <= 0.0) throw ParameterError("second_moment: zero in-box norm");
    return weighted / norm2;
}

ObservableRecord observe(const WaveState& state, const LatticeParams& params,
                         bool with_profile) {
    ObservableRecord rec;
    rec.t = state.t;
    rec.p = survival_probability(state, params);
    rec.pr = participation_number(state, params);
    rec.m2 = second_moment(state, params);
    if (with_profile) {
        std::vector<double> prof;
        prof.reserve(params.L);
        for (int n = -params.box_half(); n <= params.box_half(); ++n)
            prof.push_back(std::norm(state.c[params.index_of(n)]));
        rec.profile = std::move(prof);
    }
    return rec;
}

}  // namespace danse
