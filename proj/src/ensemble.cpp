#include "danse/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>

#include "danse/observables.hpp"

namespace danse {

void EnsembleSpec::validate() const {
    params.validate();
    init.validate();
    cfg.validate();
    schedule.validate();
    if (n_real < 1) throw ParameterError("EnsembleSpec: n_real must be >= 1");
    if (schedule.times.empty())
        throw ParameterError("EnsembleSpec: schedule must have at least one sample");
    if (init.L0 > params.L)
        throw GeometryError("EnsembleSpec: L0 exceeds box size");
}

namespace {

inline void hash_u64(std::uint64_t& h, std::uint64_t x) {
    // FNV-1a over the 8 bytes
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xffULL;
        h *= 0x100000001b3ULL;
    }
}

inline void hash_double(std::uint64_t& h, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    hash_u64(h, bits);
}

std::uint64_t spec_hash(const EnsembleSpec& s, bool with_master) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_u64(h, static_cast<std::uint64_t>(s.params.L));
    hash_u64(h, static_cast<std::uint64_t>(s.params.L_a));
    hash_double(h, s.params.eta_a);
    hash_double(h, s.params.n_c);
    hash_double(h, s.params.W);
    hash_double(h, s.params.g);
    hash_u64(h, static_cast<std::uint64_t>(s.init.shape));
    hash_u64(h, static_cast<std::uint64_t>(s.init.L0));
    hash_u64(h, static_cast<std::uint64_t>(s.init.phases));
    hash_double(h, s.cfg.dt);
    hash_u64(h, static_cast<std::uint64_t>(s.cfg.nl_iters));
    hash_double(h, s.cfg.nl_tol);
    hash_u64(h, s.schedule.times.size());
    for (double t : s.schedule.times) hash_double(h, t);
    hash_u64(h, static_cast<std::uint64_t>(s.n_real));
    hash_u64(h, with_master ? s.master_seed : 0ULL);
    hash_u64(h, s.record_profile ? 1ULL : 0ULL);
    return h;
}

}  // namespace

std::uint64_t fingerprint(const EnsembleSpec& spec) { return spec_hash(spec, true); }
std::uint64_t config_fingerprint(const EnsembleSpec& spec) { return spec_hash(spec, false); }

EnsembleResult run_ensemble(const EnsembleSpec& spec, int jobs) {
    spec.validate();
    const int n = spec.n_real;
    const std::size_t n_samples = spec.schedule.times.size();

    // Derive per-realization streams up front and verify they never collide.
    std::vector<std::uint64_t> dseeds(n), pseeds(n);
    {
        std::unordered_set<std::uint64_t> seen;
        for (int i = 0; i < n; ++i) {
            dseeds[i] = derive_seed(spec.master_seed, i, SeedStream::Disorder);
            pseeds[i] = derive_seed(spec.master_seed, i, SeedStream::Phases);
            if (!seen.insert(dseeds[i]).second || !seen.insert(pseeds[i]).second)
                throw ParameterError("run_ensemble: seed stream collision for master_seed " +
                                     std::to_string(spec.master_seed));
        }
    }

    std::vector<std::vector<double>> p_real(n);
    std::vector<std::vector<double>> prof_real;
    if (spec.record_profile) prof_real.resize(n);

    struct Failure {
        int index;
        std::uint64_t seed;
        std::string what;
    };
    std::optional<Failure> failure;
    std::mutex failure_mutex;
    std::atomic<int> next{0};
    std::atomic<bool> abort{false};

    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n || abort.load()) return;
            try {
                const DisorderRealization dis = sample_disorder(spec.params, dseeds[i]);
                InitialStateSpec init = spec.init;
                init.seed = pseeds[i];
                WaveState state = make_initial_state(init, spec.params);

                std::vector<double> ps;
                ps.reserve(n_samples);
                Observer record = [&](const WaveState& s) {
                    ps.push_back(survival_probability(s, spec.params));
                };
                const double t_end = spec.schedule.times.back();
                state = evolve(std::move(state), dis, spec.params, spec.cfg,
                               spec.schedule, {record}, t_end);
                if (spec.record_profile) {
                    std::vector<double> prof(spec.params.L);
                    for (int m = -spec.params.box_half(); m <= spec.params.box_half(); ++m)
                        prof[m + spec.params.box_half()] =
                            std::norm(state.c[spec.params.index_of(m)]);
                    prof_real[i] = std::move(prof);
                }
                p_real[i] = std::move(ps);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = Failure{i, dseeds[i], e.what()};
                abort.store(true);
                return;
            }
        }
    };

    int n_threads = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min(n_threads, n);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure)
        throw EnsembleError("run_ensemble: realization " + std::to_string(failure->index) +
                                " (disorder seed " + std::to_string(failure->seed) +
                                ") failed: " + failure->what,
                            failure->index, failure->seed);

    EnsembleResult result;
    SurvivalTrace& trace = result.trace;
    trace.spec = spec;
    trace.n_real = n;
    trace.fp = fingerprint(spec);
    trace.t = spec.schedule.times;
    trace.p_mean.assign(n_samples, 0.0);
    trace.p_stderr.assign(n_samples, 0.0);

    // Fixed index-order reduction keeps the result independent of scheduling.
    for (std::size_t k = 0; k < n_samples; ++k) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += p_real[i][k];
        const double m = sum / n;
        trace.p_mean[k] = m;
        if (n > 1) {
            double ss = 0.0;
            for (int i = 0; i < n; ++i) {
                const double d = p_real[i][k] - m;
                ss += d * d;
            }
            trace.p_stderr[k] = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
        }
    }
    if (spec.record_profile) {
        result.mean_final_profile.assign(spec.params.L, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < spec.params.L; ++j)
                result.mean_final_profile[j] += prof_real[i][j] / n;
    }
    return result;
}

SurvivalTrace merge(const std::vector<SurvivalTrace>& traces) {
    if (traces.empty()) throw MergeError("merge: no traces");
    const SurvivalTrace& first = traces.front();
    const std::uint64_t want = config_fingerprint(first.spec);
    for (const auto& tr : traces) {
        if (config_fingerprint(tr.spec) != want)
            throw MergeError("merge: trace specs differ beyond master_seed");
        if (tr.t != first.t) throw MergeError("merge: schedules differ");
    }

    SurvivalTrace out;
    out.spec = first.spec;
    out.t = first.t;
    long long n_total = 0;
    for (const auto& tr : traces) n_total += tr.n_real;
    out.n_real = static_cast<int>(n_total);
    out.spec.n_real = out.n_real;
    out.fp = fingerprint(out.spec);

    const std::size_t n_samples = first.t.size();
    out.p_mean.assign(n_samples, 0.0);
    out.p_stderr.assign(n_samples, 0.0);
    for (std::size_t k = 0; k < n_samples; ++k) {
        // Chan et al. pairwise combination: exact pooled moments without the
        // sum-of-squares cancellation near p = 1.
        double s1 = 0.0;
        for (const auto& tr : traces) s1 += tr.n_real * tr.p_mean[k];
        const double mean = s1 / n_total;
        out.p_mean[k] = mean;
        if (n_total > 1) {
            double m2 = 0.0;
            for (const auto& tr : traces) {
                const double n = tr.n_real;
                const double d = tr.p_mean[k] - mean;
                m2 += tr.p_stderr[k] * tr.p_stderr[k] * n * (n - 1.0) + n * d * d;
            }
            out.p_stderr[k] = std::sqrt(m2 / (n_total - 1.0) / n_total);
        }
    }
    return out;
}

}  // namespace danse
