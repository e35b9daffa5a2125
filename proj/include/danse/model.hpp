#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "danse/errors.hpp"

namespace danse {

using cdouble = std::complex<double>;

// Box of L sites (odd, indexed n in [-(L-1)/2, (L-1)/2]) flanked on each side
// by L_a absorber sites. Energies are in units of the hopping T, time in
// units of hbar/T.
struct LatticeParams {
    int L = 101;           // box size in sites, odd
    int L_a = 10;          // absorber extension beyond each box edge
    double eta_a = 0.1;    // absorber strength at the first absorbing site
    double n_c = 10.0 / 3.0;  // absorber exponential growth scale
    double W = 2.0;        // disorder amplitude, v_n uniform in [-W/2, W/2]
    double g = 0.0;        // nonlinearity, signed

    void validate() const;

    int box_half() const { return (L - 1) / 2; }
    int grid_half() const { return (L - 1) / 2 + L_a; }
    int grid_size() const { return L + 2 * L_a; }
    int index_of(int n) const { return n + grid_half(); }
    int site_of(int i) const { return i - grid_half(); }
    bool in_box(int n) const { return n >= -box_half() && n <= box_half(); }
    bool in_grid(int n) const { return n >= -grid_half() && n <= grid_half(); }
};

// On-site energies over the full grid plus the seed that generated them.
struct DisorderRealization {
    std::vector<double> v;
    std::uint64_t seed = 0;
};

// Complex amplitudes over the full grid at elapsed time t.
struct WaveState {
    std::vector<cdouble> c;
    double t = 0.0;

    double norm() const {
        double s = 0;
        for (const auto& a : c) s += std::norm(a);
        return s;
    }
};

enum class Shape { Square, Gaussian };
enum class Phases { RandomUniform, Coherent };

struct InitialStateSpec {
    Shape shape = Shape::Square;
    int L0 = 21;               // width in sites, odd
    Phases phases = Phases::RandomUniform;
    std::uint64_t seed = 0;    // phase RNG seed

    void validate() const;
};

// v_n i.i.d. uniform on [-W/2, W/2] over the full grid, deterministic in seed.
DisorderRealization sample_disorder(const LatticeParams& params, std::uint64_t seed);

// 0 inside the box; -i eta_a exp((|n| - (L-1)/2)/n_c) on absorber sites, so
// the magnitude starts at eta_a at the first site beyond the box edge.
cdouble absorber_potential(int n, const LatticeParams& params);

// Square: |c_n| = L0^(-1/2) on |n| <= (L0-1)/2. Gaussian: |c_n|^2 sampled
// from a normal density with the same second moment, renormalized on the
// grid. Phases per spec; t = 0.
WaveState make_initial_state(const InitialStateSpec& spec, const LatticeParams& params);

// h_n = (v_n + V_abs(n) + g|c_n|^2) c_n - c_{n-1} - c_{n+1}, hard wall at the
// absorber outer edge.
void apply_hamiltonian(const WaveState& state, const DisorderRealization& dis,
                       const LatticeParams& params, std::span<cdouble> out);
std::vector<cdouble> apply_hamiltonian(const WaveState& state,
                                       const DisorderRealization& dis,
                                       const LatticeParams& params);

// Weak-disorder localization length 96 W^-2 cos^2(nu); nu = 0 is the band
// center. W = 0 returns +infinity (no localization).
double anderson_localization_length(double W, double nu);

}  // namespace danse
