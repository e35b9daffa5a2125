#pragma once

#include <optional>
#include <vector>

#include "danse/model.hpp"

namespace danse {

struct ObservableRecord {
    double t = 0.0;
    double p = 0.0;   // survival probability, box sites only
    double pr = 0.0;  // participation number of the renormalized in-box state
    double m2 = 0.0;  // second moment over box sites
    std::optional<std::vector<double>> profile;  // |c_n|^2 over box sites
};

// Probability remaining in the box: sum of |c_n|^2 over |n| <= (L-1)/2.
double survival_probability(const WaveState& state, const LatticeParams& params);

// (sum |c_n|^4)^-1 after renormalizing the in-box amplitudes to unit norm.
double participation_number(const WaveState& state, const LatticeParams& params);

// Norm-weighted sum n^2 |c_n|^2 / sum |c_n|^2 over box sites.
double second_moment(const WaveState& state, const LatticeParams& params);

ObservableRecord observe(const WaveState& state, const LatticeParams& params,
                         bool with_profile = false);

}  // namespace danse
