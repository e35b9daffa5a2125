#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "danse/ensemble.hpp"
#include "danse/fit.hpp"
#include "danse/io.hpp"
#include "danse/numerics.hpp"
#include "danse/observables.hpp"
#include "danse/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace danse;

namespace {

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

double linear_ell0(double W) {
    return anderson_localization_length(W, 0.0);
}

struct SweepPoint {
    double W;
    int L0;
    double g;
};

std::vector<SweepPoint> sweep_grid(const io::RunConfig& cfg) {
    std::vector<SweepPoint> grid;
    for (double W : cfg.W_list)
        for (int L0 : cfg.L0_list)
            for (double g : cfg.g_list) grid.push_back({W, L0, g});
    return grid;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int jobs,
            bool dry_run, bool paper_scale) {
    io::RunConfig cfg = io::load_run_config(config_path);
    if (paper_scale) io::apply_paper_scale(cfg);
    const auto grid = sweep_grid(cfg);

    if (dry_run) {
        const double steps_per_real = cfg.t_max / cfg.integ.dt;
        std::printf("dry run: %zu grid points x %d realizations\n", grid.size(),
                    cfg.n_real);
        std::printf("estimated steps: %.3g (%.3g per realization)\n",
                    grid.size() * cfg.n_real * steps_per_real, steps_per_real);
        return 0;
    }

    fs::create_directories(out_dir);
    json manifest{{"artifact_version", io::kVersion}, {"points", json::array()}};
    auto flush_manifest = [&]() {
        std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << '\n';
    };

    std::printf("%10s %6s %6s %12s %12s  %s\n", "g", "W", "L0", "p(t_max)", "stderr",
                "file");
    for (const auto& pt : grid) {
        const EnsembleSpec spec = io::make_spec(cfg, pt.W, pt.g, pt.L0);
        EnsembleResult result;
        try {
            result = run_ensemble(spec, jobs);
        } catch (const EnsembleError& e) {
            flush_manifest();
            std::fprintf(stderr, "numerical failure: %s\n", e.what());
            std::fprintf(stderr, "replay: realization %d, disorder seed %llu\n",
                         e.index, static_cast<unsigned long long>(e.seed));
            return 2;
        }
        io::write_trace(out_dir, result.trace);
        const std::string stem = io::trace_stem(pt.W, pt.L0, pt.g);
        if (!result.mean_final_profile.empty()) {
            std::ofstream prof(fs::path(out_dir) / (stem + "_profile.csv"));
            prof << "n,mean_abs2\n";
            const int bh = spec.params.box_half();
            for (int j = 0; j < spec.params.L; ++j)
                prof << (j - bh) << ',' << io::fmt(result.mean_final_profile[j]) << '\n';
        }
        manifest["points"].push_back(json{{"W", pt.W},
                                          {"L0", pt.L0},
                                          {"g", pt.g},
                                          {"trace", stem + ".csv"},
                                          {"completed_at", now_utc()}});
        flush_manifest();
        std::printf("%10g %6g %6d %12.6f %12.2e  %s\n", pt.g, pt.W, pt.L0,
                    result.trace.p_mean.back(), result.trace.p_stderr.back(),
                    (stem + ".csv").c_str());
    }
    return 0;
}

int cmd_fit(const std::string& in_dir, const std::string& out_dir) {
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".csv")
            csvs.push_back(entry.path());
    }
    std::sort(csvs.begin(), csvs.end());
    if (csvs.empty()) {
        std::fprintf(stderr, "no trace_*.csv files in %s\n", in_dir.c_str());
        return 1;
    }

    std::vector<FitRow> rows;
    for (const auto& path : csvs) {
        try {
            const SurvivalTrace trace = io::read_trace(path);
            const double W = trace.spec.params.W;
            const double ell_a = effective_absorber_distance(
                trace.spec.params.L, trace.spec.init.L0, linear_ell0(W));
            FitRow row;
            row.g = trace.spec.params.g;
            row.W = W;
            row.L0 = trace.spec.init.L0;
            row.fit = fit_survival(trace, ell_a);
            rows.push_back(row);
        } catch (const Error& e) {
            std::fprintf(stderr, "warning: skipping %s: %s\n",
                         path.filename().string().c_str(), e.what());
        }
    }
    if (rows.empty()) {
        std::fprintf(stderr, "all traces skipped\n");
        return 1;
    }
    fs::create_directories(out_dir);
    io::write_fit_table(fs::path(out_dir) / "fits.csv", rows);
    io::write_fit_json(fs::path(out_dir) / "fits.json", rows);
    std::printf("%10s %6s %6s %12s %12s %10s %5s %8s\n", "g", "W", "L0", "ell_eff",
                "t2", "residual", "conv", "no_loss");
    for (const auto& r : rows)
        std::printf("%10g %6g %6d %12.4f %12.4g %10.2e %5d %8d\n", r.g, r.W, r.L0,
                    r.fit.ell_eff, r.fit.t2, r.fit.residual, r.fit.converged ? 1 : 0,
                    r.fit.no_loss ? 1 : 0);
    return 0;
}

int cmd_scale(const std::string& fits_path, const std::string& out_dir) {
    const std::vector<FitRow> rows = io::read_fit_table(fits_path);
    if (rows.empty()) {
        std::fprintf(stderr, "empty fit table %s\n", fits_path.c_str());
        return 1;
    }
    std::vector<ScaledPoint> points;
    for (const auto& r : rows) {
        if (!std::isfinite(r.fit.ell_eff)) continue;
        points.push_back(scale_point(r.g, r.W, r.L0, r.fit.ell_eff));
    }
    fs::create_directories(out_dir);
    io::write_scaled_table(fs::path(out_dir) / "scaled.csv", points);

    std::set<double> Ws;
    for (const auto& p : points) Ws.insert(p.W);

    std::ofstream collapse(fs::path(out_dir) / "collapse.csv");
    collapse << "W,g_tilde_bin,cv_scaled,cv_unscaled\n";
    for (double W : Ws) {
        std::vector<ScaledPoint> sub;
        for (const auto& p : points)
            if (p.W == W && p.g_tilde > 0.0) sub.push_back(p);
        try {
            const CollapseReport rep = collapse_quality(sub);
            for (std::size_t b = 0; b < rep.g_tilde_bins.size(); ++b)
                collapse << io::fmt(W) << ',' << io::fmt(rep.g_tilde_bins[b]) << ','
                         << io::fmt(rep.cv_scaled[b]) << ','
                         << io::fmt(rep.cv_unscaled[b]) << '\n';
        } catch (const Error& e) {
            std::fprintf(stderr, "warning: no collapse report for W = %g: %s\n", W,
                         e.what());
        }
    }

    std::ofstream cross(fs::path(out_dir) / "crossovers.csv");
    cross << "W,L0,plateau,g_c,g_c_unc,g_st,g_st_unc\n";
    for (double W : Ws) {
        std::set<int> L0s;
        for (const auto& p : points)
            if (p.W == W) L0s.insert(p.L0);
        for (int L0 : L0s) {
            std::vector<std::pair<double, double>> curve;
            for (const auto& p : points)
                if (p.W == W && p.L0 == L0 && p.g_tilde > 0.0)
                    curve.emplace_back(p.g_tilde, p.ell_tilde);
            if (curve.size() < 3) continue;
            const CrossoverResult cr = detect_crossovers(curve);
            cross << io::fmt(W) << ',' << L0 << ',' << io::fmt(cr.plateau) << ','
                  << (cr.has_g_c ? io::fmt(cr.g_c) : "") << ','
                  << (cr.has_g_c ? io::fmt(cr.g_c_unc) : "") << ','
                  << (cr.has_g_st ? io::fmt(cr.g_st) : "") << ','
                  << (cr.has_g_st ? io::fmt(cr.g_st_unc) : "") << '\n';
        }
    }
    std::printf("scaled table: %zu points, %zu disorder values\n", points.size(),
                Ws.size());
    return 0;
}

int cmd_eigen(const std::string& config_path, const std::string& out_dir, int jobs) {
    const io::RunConfig cfg = io::load_run_config(config_path);
    fs::create_directories(out_dir);
    json summary{{"artifact_version", io::kVersion}, {"W", json::array()}};

    for (double W : cfg.W_list) {
        LatticeParams params = cfg.base;
        params.W = W;
        params.g = 0.0;

        std::vector<DisorderRealization> ensemble(cfg.n_real);
        for (int i = 0; i < cfg.n_real; ++i)
            ensemble[i] = sample_disorder(
                params, derive_seed(cfg.master_seed, i, SeedStream::Disorder));

        // Full spectra export
        std::vector<std::pair<std::uint64_t, std::vector<EigenPair>>> spectra;
        spectra.reserve(ensemble.size());
        for (const auto& dis : ensemble)
            spectra.emplace_back(dis.seed, diagonalize_anderson(dis, params));
        io::write_spectra_csv(fs::path(out_dir) / ("spectra_W" + io::fmt(W) + ".csv"),
                              spectra);

        // Binned wing length against band position, with the weak-disorder
        // law. Median per bin; the per-state estimator throws rare huge
        // values for hybridized two-peak states.
        const int n_bins = 24;
        std::vector<std::vector<double>> bin_vals(n_bins);
        for (const auto& [seed, pairs] : spectra)
            for (const auto& p : pairs) {
                if (std::abs(p.E) > 2.0 || !std::isfinite(p.ell)) continue;
                if (std::abs(p.n_center) > params.box_half() - 12) continue;
                const double nu = band_position(p.E);
                int b = static_cast<int>((nu / M_PI + 0.5) * n_bins);
                b = std::clamp(b, 0, n_bins - 1);
                bin_vals[b].push_back(p.ell);
            }
        {
            std::ofstream out(fs::path(out_dir) / ("ell_vs_nu_W" + io::fmt(W) + ".csv"));
            out << "nu,ell_median,ell_weak_disorder,n\n";
            for (int b = 0; b < n_bins; ++b) {
                if (bin_vals[b].empty()) continue;
                auto& v = bin_vals[b];
                std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
                const double nu = (static_cast<double>(b) + 0.5) / n_bins * M_PI - M_PI / 2;
                out << io::fmt(nu) << ',' << io::fmt(v[v.size() / 2]) << ','
                    << io::fmt(anderson_localization_length(W, nu)) << ','
                    << v.size() << '\n';
            }
        }

        // Averaged envelope in the band-center window
        const LocalizationProfile prof = mean_localization_profile(
            ensemble, params, -cfg.eigen_window_half_width, cfg.eigen_window_half_width);
        {
            std::ofstream out(fs::path(out_dir) / ("profile_W" + io::fmt(W) + ".csv"));
            out << "offset,mean_psi2\n";
            for (std::size_t k = 0; k < prof.offset.size(); ++k)
                out << prof.offset[k] << ',' << io::fmt(prof.mean_psi2[k]) << '\n';
        }

        // Attenuation times for band-center states of intermediate width
        struct DecayJob {
            const DisorderRealization* dis;
            EigenPair pair;
        };
        std::vector<DecayJob> jobs_list;
        const int n_decay = std::min<int>(cfg.eigen_decay_realizations, cfg.n_real);
        for (int i = 0; i < n_decay; ++i)
            for (const auto& p : spectra[i].second)
                if (std::isfinite(p.ell) && p.ell >= cfg.eigen_ell_min &&
                    p.ell <= cfg.eigen_ell_max &&
                    std::abs(p.n_center) <= cfg.eigen_center_max)
                    jobs_list.push_back({&ensemble[i], p});

        const RecordingSchedule sched = RecordingSchedule::logspaced(
            cfg.t_min, cfg.t_max, cfg.points_per_decade, cfg.max_samples);
        std::vector<double> tnus(jobs_list.size());
        {
            std::atomic<int> next{0};
            auto worker = [&]() {
                for (;;) {
                    const int k = next.fetch_add(1);
                    if (k >= static_cast<int>(jobs_list.size())) return;
                    const auto trace = eigenstate_decay_trace(
                        jobs_list[k].pair, *jobs_list[k].dis, params, cfg.integ, sched);
                    tnus[k] = fit_decay_time(sched.times, trace);
                }
            };
            int n_threads = jobs > 0 ? jobs
                                     : static_cast<int>(std::thread::hardware_concurrency());
            n_threads = std::clamp<int>(n_threads, 1, std::max<std::size_t>(jobs_list.size(), 1));
            std::vector<std::thread> pool;
            for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        std::vector<std::pair<double, double>> pairs;
        std::vector<double> inv_ell, log_tnu;
        double center_abs_sum = 0.0;
        {
            std::ofstream out(fs::path(out_dir) / ("tnu_W" + io::fmt(W) + ".csv"));
            out << "t_nu,ell_nu,inv_ell_nu,n_center\n";
            for (std::size_t k = 0; k < jobs_list.size(); ++k) {
                const auto& p = jobs_list[k].pair;
                out << io::fmt(tnus[k]) << ',' << io::fmt(p.ell) << ','
                    << io::fmt(1.0 / p.ell) << ',' << io::fmt(p.n_center) << '\n';
                if (!std::isfinite(tnus[k])) continue;
                pairs.emplace_back(tnus[k], p.ell);
                inv_ell.push_back(1.0 / p.ell);
                log_tnu.push_back(std::log(tnus[k]));
                center_abs_sum += std::abs(p.n_center);
            }
        }

        json wsum{{"W", W},
                  {"profile_ell", prof.ell},
                  {"profile_states", prof.n_states},
                  {"ell0_weak_disorder", anderson_localization_length(W, 0.0)},
                  {"decay_states", pairs.size()}};
        if (pairs.size() >= 5) {
            const double ell_a_nominal =
                params.box_half() - center_abs_sum / static_cast<double>(pairs.size());
            const double t2 =
                fit_tnu_law(pairs, ell_a_nominal, anderson_localization_length(W, 0.0));
            const LinearFit free_fit = linear_fit(inv_ell, log_tnu);
            wsum["ell_a_nominal"] = ell_a_nominal;
            wsum["t2"] = t2;
            wsum["slope_free"] = free_fit.slope;
            wsum["slope_nominal"] = 2.0 * ell_a_nominal;
            wsum["r2"] = free_fit.r2;
        }
        summary["W"].push_back(wsum);
        std::printf("W = %g: profile ell = %.3f (%d states), %zu decay fits\n", W,
                    prof.ell, prof.n_states, pairs.size());
    }
    std::ofstream(fs::path(out_dir) / "eigen_summary.json") << summary.dump(2) << '\n';
    return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir) {
    fs::create_directories(out_dir);
    int emitted = 0;

    // Survival traces grouped by W: p(t_max) against g per L0 + raw curves
    std::vector<SurvivalTrace> traces;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".csv") {
            try {
                traces.push_back(io::read_trace(entry.path()));
            } catch (const Error&) {
            }
        }
    }
    std::vector<FitRow> fits;
    if (fs::exists(fs::path(in_dir) / "fits.csv"))
        fits = io::read_fit_table(fs::path(in_dir) / "fits.csv");
    auto find_fit = [&](double W, int L0, double g) -> const FitRow* {
        for (const auto& r : fits)
            if (r.W == W && r.L0 == L0 && r.g == g) return &r;
        return nullptr;
    };

    if (!traces.empty()) {
        std::set<double> Ws;
        for (const auto& tr : traces) Ws.insert(tr.spec.params.W);
        for (double W : Ws) {
            std::ofstream out(fs::path(out_dir) /
                              ("fig_survival_vs_g_W" + io::fmt(W) + ".csv"));
            out << "g,L0,t,p,p_stderr\n";
            std::vector<const SurvivalTrace*> grp;
            for (const auto& tr : traces)
                if (tr.spec.params.W == W) grp.push_back(&tr);
            std::sort(grp.begin(), grp.end(), [](auto* a, auto* b) {
                return std::tie(a->spec.init.L0, a->spec.params.g) <
                       std::tie(b->spec.init.L0, b->spec.params.g);
            });
            for (const auto* tr : grp)
                out << io::fmt(tr->spec.params.g) << ',' << tr->spec.init.L0 << ','
                    << io::fmt(tr->t.back()) << ',' << io::fmt(tr->p_mean.back()) << ','
                    << io::fmt(tr->p_stderr.back()) << '\n';
            ++emitted;
        }
        fs::create_directories(fs::path(out_dir) / "curves");
        for (const auto& tr : traces) {
            const double W = tr.spec.params.W;
            const int L0 = tr.spec.init.L0;
            const double g = tr.spec.params.g;
            std::ofstream out(fs::path(out_dir) / "curves" /
                              ("p_vs_t_" + io::trace_stem(W, L0, g).substr(6) + ".csv"));
            const FitRow* fr = find_fit(W, L0, g);
            out << "t,p,p_stderr,p_model\n";
            for (std::size_t k = 0; k < tr.t.size(); ++k) {
                out << io::fmt(tr.t[k]) << ',' << io::fmt(tr.p_mean[k]) << ','
                    << io::fmt(tr.p_stderr[k]) << ',';
                if (fr && std::isfinite(fr->fit.ell_eff) && std::isfinite(fr->fit.t2))
                    out << io::fmt(model_p_nonlinear(tr.t[k], fr->fit.ell_eff,
                                                     fr->fit.t2, fr->fit.ell_a));
                out << '\n';
            }
            ++emitted;
        }
    }

    if (!fits.empty()) {
        std::set<double> Ws;
        for (const auto& r : fits) Ws.insert(r.W);
        for (double W : Ws) {
            std::ofstream leff(fs::path(out_dir) / ("fig_leff_vs_g_W" + io::fmt(W) + ".csv"));
            std::ofstream t2f(fs::path(out_dir) / ("fig_t2_vs_g_W" + io::fmt(W) + ".csv"));
            leff << "g,L0,ell_eff,converged,no_loss\n";
            t2f << "g,L0,t2,converged,no_loss\n";
            for (const auto& r : fits) {
                if (r.W != W) continue;
                leff << io::fmt(r.g) << ',' << r.L0 << ',' << io::fmt(r.fit.ell_eff)
                     << ',' << (r.fit.converged ? 1 : 0) << ','
                     << (r.fit.no_loss ? 1 : 0) << '\n';
                t2f << io::fmt(r.g) << ',' << r.L0 << ',' << io::fmt(r.fit.t2) << ','
                    << (r.fit.converged ? 1 : 0) << ',' << (r.fit.no_loss ? 1 : 0)
                    << '\n';
            }
            emitted += 2;
        }
    }

    if (fs::exists(fs::path(in_dir) / "scaled.csv")) {
        const auto points = io::read_scaled_table(fs::path(in_dir) / "scaled.csv");
        std::set<double> Ws;
        for (const auto& p : points) Ws.insert(p.W);
        for (double W : Ws) {
            std::ofstream out(fs::path(out_dir) / ("fig_scaled_W" + io::fmt(W) + ".csv"));
            out << "g_tilde,ell_tilde,L0\n";
            for (const auto& p : points)
                if (p.W == W)
                    out << io::fmt(p.g_tilde) << ',' << io::fmt(p.ell_tilde) << ','
                        << p.L0 << '\n';
            ++emitted;
        }
        // Dense (g_tilde, W) matrix of the scaled length, pooled over L0
        std::vector<double> all_gt;
        for (const auto& p : points)
            if (p.g_tilde > 0) all_gt.push_back(p.g_tilde);
        if (!all_gt.empty() && Ws.size() >= 1) {
            std::sort(all_gt.begin(), all_gt.end());
            const double lo = all_gt.front(), hi = all_gt.back();
            const int nb = 25;
            std::ofstream out(fs::path(out_dir) / "fig_grid.csv");
            out << "W";
            std::vector<double> bins(nb);
            for (int b = 0; b < nb; ++b) {
                bins[b] = lo * std::pow(hi / lo, static_cast<double>(b) / (nb - 1));
                out << ",gt_" << io::fmt(bins[b]);
            }
            out << '\n';
            for (double W : Ws) {
                std::vector<std::pair<double, double>> pts;
                for (const auto& p : points)
                    if (p.W == W && p.g_tilde > 0)
                        pts.emplace_back(std::log(p.g_tilde), std::log(p.ell_tilde));
                std::sort(pts.begin(), pts.end());
                pts.erase(std::unique(pts.begin(), pts.end(),
                                      [](auto& a, auto& b) { return a.first == b.first; }),
                          pts.end());
                out << io::fmt(W);
                std::vector<double> xs, ys;
                for (auto& [x, y] : pts) {
                    xs.push_back(x);
                    ys.push_back(y);
                }
                for (double b : bins) {
                    out << ',';
                    const double lb = std::log(b);
                    if (xs.size() >= 2 && lb >= xs.front() && lb <= xs.back())
                        out << io::fmt(std::exp(interp_linear(xs, ys, lb)));
                }
                out << '\n';
            }
            ++emitted;
        }
    }

    // Attenuation-time data with the fitted law overlay
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("tnu_W", 0) != 0 || entry.path().extension() != ".csv") continue;
        json summary;
        const fs::path sum_path = fs::path(in_dir) / "eigen_summary.json";
        if (!fs::exists(sum_path)) continue;
        std::ifstream(sum_path) >> summary;
        const std::string wtag = name.substr(5, name.size() - 9);
        double t2 = 0, ell_a = 0, ell0 = 0;
        bool have = false;
        for (const auto& w : summary["W"])
            if (io::fmt(w["W"].get<double>()) == wtag && w.contains("t2")) {
                t2 = w["t2"].get<double>();
                ell_a = w["ell_a_nominal"].get<double>();
                ell0 = w["ell0_weak_disorder"].get<double>();
                have = true;
            }
        std::vector<std::string> header;
        const auto rows = io::read_csv(entry.path(), &header);
        std::ofstream out(fs::path(out_dir) / ("fig_tnu_W" + wtag + ".csv"));
        out << "inv_ell_nu,t_nu,t_nu_model\n";
        for (const auto& row : rows) {
            out << row[2] << ',' << row[0] << ',';
            if (have) {
                const double inv = std::stod(row[2]);
                out << io::fmt(t2 * std::exp(2.0 * ell_a * (inv - 1.0 / ell0)));
            }
            out << '\n';
        }
        ++emitted;
    }

    if (emitted == 0) {
        std::fprintf(stderr, "nothing to report in %s\n", in_dir.c_str());
        return 1;
    }
    std::printf("wrote %d report files to %s\n", emitted, out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"danse: disordered nonlinear lattice dynamics in an absorbing box"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", in_dir = ".";
    int jobs = 0;
    bool dry_run = false, paper_scale = false;

    auto* run = app.add_subcommand("run", "run survival-probability ensembles over a sweep grid");
    run->add_option("--config", config_path, "JSON run configuration")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--jobs", jobs, "worker threads (0 = all cores)");
    run->add_flag("--dry-run", dry_run, "print grid size and step estimate, write nothing");
    run->add_flag("--paper-scale", paper_scale, "t_max = 1e5, n_real = 1000");

    auto* fit = app.add_subcommand("fit", "fit the survival model to recorded traces");
    fit->add_option("--in", in_dir, "directory with trace_*.csv + sidecars")->required();
    fit->add_option("--out", out_dir, "output directory (default: --in)");

    auto* scale = app.add_subcommand("scale", "scaled variables, collapse and crossover report");
    scale->add_option("--in", in_dir, "fits.csv path or its directory")->required();
    scale->add_option("--out", out_dir, "output directory (default: --in's directory)");

    auto* eigen = app.add_subcommand("eigen", "linear spectral diagnostics and decay times");
    eigen->add_option("--config", config_path, "JSON run configuration")->required();
    eigen->add_option("--out", out_dir, "output directory")->required();
    eigen->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    auto* report = app.add_subcommand("report", "collate plot-ready figure data bundles");
    report->add_option("--in", in_dir, "directory with run/fit/scale/eigen outputs")->required();
    report->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, jobs, dry_run, paper_scale);
        if (fit->parsed()) {
            if (fit->count("--out") == 0) out_dir = in_dir;
            return cmd_fit(in_dir, out_dir);
        }
        if (scale->parsed()) {
            fs::path p = in_dir;
            if (fs::is_directory(p)) p /= "fits.csv";
            if (scale->count("--out") == 0) out_dir = p.parent_path().string();
            return cmd_scale(p.string(), out_dir);
        }
        if (eigen->parsed()) return cmd_eigen(config_path, out_dir, jobs);
        if (report->parsed()) return cmd_report(in_dir, out_dir);
    } catch (const StepError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const EnsembleError& e) {
        std::fprintf(stderr, "numerical failure: %s (replay seed %llu)\n", e.what(),
                     static_cast<unsigned long long>(e.seed));
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
