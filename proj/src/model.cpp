#include "danse/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "danse/rng.hpp"

namespace danse {

void LatticeParams::validate() const {
    if (L < 3 || L % 2 == 0)
        throw ParameterError("LatticeParams: L must be odd and >= 3, got " + std::to_string(L));
    if (L_a < 1)
        throw ParameterError("LatticeParams: L_a must be >= 1, got " + std::to_string(L_a));
    // eta_a = 0 switches the absorber off; used by conservation checks.
    if (eta_a < 0.0) throw ParameterError("LatticeParams: eta_a must be >= 0");
    if (!(n_c > 0.0)) throw ParameterError("LatticeParams: n_c must be > 0");
    if (W < 0.0) throw ParameterError("LatticeParams: W must be >= 0");
    if (!std::isfinite(g)) throw ParameterError("LatticeParams: g must be finite");
}

void InitialStateSpec::validate() const {
    if (L0 < 1 || L0 % 2 == 0)
        throw ParameterError("InitialStateSpec: L0 must be odd and >= 1, got " + std::to_string(L0));
}

DisorderRealization sample_disorder(const LatticeParams& params, std::uint64_t seed) {
    params.validate();
    DisorderRealization dis;
    dis.seed = seed;
    dis.v.resize(params.grid_size());
    std::mt19937_64 gen(seed);
    for (auto& vn : dis.v) vn = params.W * (u01(gen) - 0.5);
    return dis;
}

cdouble absorber_potential(int n, const LatticeParams& params) {
    params.validate();
    if (!params.in_grid(n))
        throw IndexError("absorber_potential: site " + std::to_string(n) + " outside grid");
    const int edge = params.box_half();
    if (std::abs(n) <= edge) return {0.0, 0.0};
    const double depth = std::abs(n) - edge;
    return {0.0, -params.eta_a * std::exp(depth / params.n_c)};
}

WaveState make_initial_state(const InitialStateSpec& spec, const LatticeParams& params) {
    params.validate();
    spec.validate();
    if (spec.L0 > params.L)
        throw GeometryError("make_initial_state: L0 = " + std::to_string(spec.L0) +
                            " exceeds box L = " + std::to_string(params.L));

    WaveState state;
    state.t = 0.0;
    state.c.assign(params.grid_size(), cdouble{0.0, 0.0});

    const int half0 = (spec.L0 - 1) / 2;
    std::vector<double> modulus(params.grid_size(), 0.0);
    if (spec.shape == Shape::Square) {
        const double amp = 1.0 / std::sqrt(static_cast<double>(spec.L0));
        for (int n = -half0; n <= half0; ++n) modulus[params.index_of(n)] = amp;
    } else {
        // Gaussian with the same second moment as the square state of width
        // L0, then renormalized on the finite grid. L0 = 1 degenerates to a
        // single site.
        const double sigma2 = (static_cast<double>(spec.L0) * spec.L0 - 1.0) / 12.0;
        if (sigma2 == 0.0) {
            modulus[params.index_of(0)] = 1.0;
        } else {
            double total = 0.0;
            for (int i = 0; i < params.grid_size(); ++i) {
                const double n = params.site_of(i);
                const double density =
                    std::exp(-n * n / (2.0 * sigma2)) / std::sqrt(2.0 * M_PI * sigma2);
                modulus[i] = std::sqrt(density);
                total += density;
            }
            const double rescale = 1.0 / std::sqrt(total);
            for (auto& m : modulus) m *= rescale;
        }
    }

    if (spec.phases == Phases::Coherent) {
        for (int i = 0; i < params.grid_size(); ++i) state.c[i] = modulus[i];
    } else {
        std::mt19937_64 gen(spec.seed);
        for (int i = 0; i < params.grid_size(); ++i) {
            // Draw a phase for every site so the stream does not depend on L0.
            const double phi = 2.0 * M_PI * u01(gen);
            if (modulus[i] != 0.0)
                state.c[i] = std::polar(modulus[i], phi);
        }
    }
    return state;
}

void apply_hamiltonian(const WaveState& state, const DisorderRealization& dis,
                       const LatticeParams& params, std::span<cdouble> out) {
    const std::size_t m = state.c.size();
    if (dis.v.size() != m || out.size() != m ||
        m != static_cast<std::size_t>(params.grid_size()))
        throw GeometryError("apply_hamiltonian: state/disorder/grid size mismatch");
    const int edge = params.box_half();
    const double g = params.g;
    for (std::size_t i = 0; i < m; ++i) {
        const int n = params.site_of(static_cast<int>(i));
        cdouble diag{dis.v[i] + g * std::norm(state.c[i]), 0.0};
        if (std::abs(n) > edge)
            diag += cdouble{0.0, -params.eta_a * std::exp((std::abs(n) - edge) / params.n_c)};
        cdouble h = diag * state.c[i];
        if (i > 0) h -= state.c[i - 1];
        if (i + 1 < m) h -= state.c[i + 1];
        out[i] = h;
    }
}

std::vector<cdouble> apply_hamiltonian(const WaveState& state,
                                       const DisorderRealization& dis,
                                       const LatticeParams& params) {
    std::vector<cdouble> out(state.c.size());
    apply_hamiltonian(state, dis, params, out);
    return out;
}

double anderson_localization_length(double W, double nu) {
    if (W < 0.0) throw ParameterError("anderson_localization_length: W must be >= 0");
    if (W == 0.0) return std::numeric_limits<double>::infinity();
    const double c = std::cos(nu);
    return 96.0 / (W * W) * c * c;
}

}  // namespace danse
