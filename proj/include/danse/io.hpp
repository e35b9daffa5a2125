#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "danse/ensemble.hpp"
#include "danse/fit.hpp"
#include "danse/spectral.hpp"

namespace danse::io {

inline constexpr const char* kVersion = "0.1.0";

// Flat JSON run configuration: one ensemble spec plus sweep axes for
// (W, g, L0). Keys and units are documented in docs/config_schema.md.
struct RunConfig {
    LatticeParams base;  // W and g are overwritten per sweep point
    std::vector<double> W_list{2.0};
    std::vector<double> g_list{0.0};
    std::vector<int> L0_list{21};
    Shape shape = Shape::Square;
    Phases phases = Phases::RandomUniform;
    IntegratorConfig integ;
    double t_min = 1.0;
    double t_max = 1e4;
    int points_per_decade = 64;
    int max_samples = 400;
    int n_real = 200;
    std::uint64_t master_seed = 1;
    bool record_profile = false;

    // eigen-pipeline knobs (danse eigen)
    double eigen_window_half_width = 0.25;  // energy window around E = 0
    double eigen_center_max = 7.0;          // |n_center| cut for decay states
    double eigen_ell_min = 9.0;             // ell_nu range for decay states
    double eigen_ell_max = 26.0;
    int eigen_decay_realizations = 30;

    void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

// Applies the paper-scale overrides (t_max = 1e5, n_real = 1000).
void apply_paper_scale(RunConfig& cfg);

EnsembleSpec make_spec(const RunConfig& cfg, double W, double g, int L0);

// Deterministic, filesystem-safe stem for one sweep point.
std::string trace_stem(double W, int L0, double g);

// trace CSV: header t,p_mean,p_stderr; JSON sidecar with the full spec echo,
// fingerprint and artifact version.
void write_trace(const std::filesystem::path& dir, const SurvivalTrace& trace);
SurvivalTrace read_trace(const std::filesystem::path& csv_path);

void write_fit_table(const std::filesystem::path& csv_path,
                     const std::vector<FitRow>& rows);
void write_fit_json(const std::filesystem::path& json_path,
                    const std::vector<FitRow>& rows);
std::vector<FitRow> read_fit_table(const std::filesystem::path& csv_path);

void write_scaled_table(const std::filesystem::path& csv_path,
                        const std::vector<ScaledPoint>& points);
std::vector<ScaledPoint> read_scaled_table(const std::filesystem::path& csv_path);

void write_spectra_csv(const std::filesystem::path& csv_path,
                       const std::vector<std::pair<std::uint64_t,
                                                   std::vector<EigenPair>>>& spectra);

// Shortest round-trip decimal form, locale-independent.
std::string fmt(double v);

// Minimal CSV reader: header row + comma-separated numeric fields.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::vector<std::string>* header = nullptr);

}  // namespace danse::io
