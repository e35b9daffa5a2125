#pragma once

#include <cstdint>
#include <vector>

#include "danse/integrator.hpp"
#include "danse/model.hpp"
#include "danse/rng.hpp"

namespace danse {

// Everything needed to reproduce one ensemble bit-exactly.
struct EnsembleSpec {
    LatticeParams params;
    InitialStateSpec init;  // init.seed is ignored; phase seeds are derived
    IntegratorConfig cfg;
    RecordingSchedule schedule;
    int n_real = 200;
    std::uint64_t master_seed = 1;
    bool record_profile = false;

    void validate() const;
};

// Hash of every spec field; identifies a trace file with the run that made it.
std::uint64_t fingerprint(const EnsembleSpec& spec);
// Same hash with master_seed blanked, for merge compatibility checks.
std::uint64_t config_fingerprint(const EnsembleSpec& spec);

struct SurvivalTrace {
    std::vector<double> t;
    std::vector<double> p_mean;
    std::vector<double> p_stderr;  // sample stddev / sqrt(n_real); 0 for n_real = 1
    int n_real = 0;
    std::uint64_t fp = 0;
    EnsembleSpec spec;
};

struct EnsembleResult {
    SurvivalTrace trace;
    // Mean |c_n|^2 over box sites at the final sample time; empty unless
    // spec.record_profile.
    std::vector<double> mean_final_profile;
};

// Runs n_real independent (disorder, phase) realizations and averages the
// survival probability at each schedule time. Realizations run in parallel
// across `jobs` threads (0 = hardware concurrency); the reduction is a fixed
// index-order sweep, so the result does not depend on the thread count.
// A realization whose step fails aborts the ensemble with an EnsembleError
// carrying the index and disorder seed for replay.
EnsembleResult run_ensemble(const EnsembleSpec& spec, int jobs = 0);

// Pools traces as if their realizations had been one ensemble. All specs
// must agree except for master_seed.
SurvivalTrace merge(const std::vector<SurvivalTrace>& traces);

}  // namespace danse
