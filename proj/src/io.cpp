#include "danse/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace danse::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace {

double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParameterError("could not parse number: '" + s + "'");
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path.string());
    return in;
}

json spec_to_json(const EnsembleSpec& s) {
    return json{
        {"L", s.params.L},
        {"L_a", s.params.L_a},
        {"eta_a", s.params.eta_a},
        {"n_c", s.params.n_c},
        {"W", s.params.W},
        {"g", s.params.g},
        {"shape", s.init.shape == Shape::Square ? "square" : "gaussian"},
        {"L0", s.init.L0},
        {"phases", s.init.phases == Phases::RandomUniform ? "random" : "coherent"},
        {"dt", s.cfg.dt},
        {"nl_iters", s.cfg.nl_iters},
        {"nl_tol", s.cfg.nl_tol},
        {"schedule", s.schedule.times},
        {"n_real", s.n_real},
        {"master_seed", s.master_seed},
        {"record_profile", s.record_profile},
    };
}

EnsembleSpec spec_from_json(const json& j) {
    EnsembleSpec s;
    s.params.L = j.at("L").get<int>();
    s.params.L_a = j.at("L_a").get<int>();
    s.params.eta_a = j.at("eta_a").get<double>();
    s.params.n_c = j.at("n_c").get<double>();
    s.params.W = j.at("W").get<double>();
    s.params.g = j.at("g").get<double>();
    s.init.shape = j.at("shape").get<std::string>() == "square" ? Shape::Square
                                                                : Shape::Gaussian;
    s.init.L0 = j.at("L0").get<int>();
    s.init.phases = j.at("phases").get<std::string>() == "random"
                        ? Phases::RandomUniform
                        : Phases::Coherent;
    s.cfg.dt = j.at("dt").get<double>();
    s.cfg.nl_iters = j.at("nl_iters").get<int>();
    s.cfg.nl_tol = j.at("nl_tol").get<double>();
    s.schedule.times = j.at("schedule").get<std::vector<double>>();
    s.n_real = j.at("n_real").get<int>();
    s.master_seed = j.at("master_seed").get<std::uint64_t>();
    s.record_profile = j.at("record_profile").get<bool>();
    return s;
}

}  // namespace

void RunConfig::validate() const {
    LatticeParams p = base;
    p.W = W_list.empty() ? 0.0 : W_list.front();
    p.g = g_list.empty() ? 0.0 : g_list.front();
    p.validate();
    integ.validate();
    if (W_list.empty() || g_list.empty() || L0_list.empty())
        throw ParameterError("config: W, g and L0 sweep lists must be non-empty");
    for (double w : W_list)
        if (w < 0) throw ParameterError("config: W must be >= 0");
    for (int l0 : L0_list)
        if (l0 < 1 || l0 % 2 == 0 || l0 > base.L)
            throw ParameterError("config: each L0 must be odd, >= 1 and <= L");
    if (!(t_min > 0) || !(t_max >= t_min))
        throw ParameterError("config: need 0 < t_min <= t_max");
    if (n_real < 1) throw ParameterError("config: n_real must be >= 1");
}

RunConfig load_run_config(const fs::path& path) {
    json j;
    try {
        open_in(path) >> j;
    } catch (const json::exception& e) {
        throw ParameterError("config " + path.string() + ": " + e.what());
    }
    RunConfig cfg;
    try {
        auto as_list = [](const json& v) {
            std::vector<double> out;
            if (v.is_array())
                out = v.get<std::vector<double>>();
            else
                out.push_back(v.get<double>());
            return out;
        };
        if (j.contains("L")) cfg.base.L = j["L"].get<int>();
        if (j.contains("L_a")) cfg.base.L_a = j["L_a"].get<int>();
        if (j.contains("eta_a")) cfg.base.eta_a = j["eta_a"].get<double>();
        cfg.base.n_c = j.contains("n_c") ? j["n_c"].get<double>() : cfg.base.L_a / 3.0;
        if (j.contains("W")) cfg.W_list = as_list(j["W"]);
        if (j.contains("g")) cfg.g_list = as_list(j["g"]);
        if (j.contains("L0")) {
            cfg.L0_list.clear();
            if (j["L0"].is_array())
                for (const auto& v : j["L0"]) cfg.L0_list.push_back(v.get<int>());
            else
                cfg.L0_list.push_back(j["L0"].get<int>());
        }
        if (j.contains("shape"))
            cfg.shape = j["shape"].get<std::string>() == "gaussian" ? Shape::Gaussian
                                                                    : Shape::Square;
        if (j.contains("phases"))
            cfg.phases = j["phases"].get<std::string>() == "coherent"
                             ? Phases::Coherent
                             : Phases::RandomUniform;
        if (j.contains("dt")) cfg.integ.dt = j["dt"].get<double>();
        if (j.contains("nl_iters")) cfg.integ.nl_iters = j["nl_iters"].get<int>();
        if (j.contains("nl_tol")) cfg.integ.nl_tol = j["nl_tol"].get<double>();
        if (j.contains("t_min")) cfg.t_min = j["t_min"].get<double>();
        if (j.contains("t_max")) cfg.t_max = j["t_max"].get<double>();
        if (j.contains("points_per_decade"))
            cfg.points_per_decade = j["points_per_decade"].get<int>();
        if (j.contains("max_samples")) cfg.max_samples = j["max_samples"].get<int>();
        if (j.contains("n_real")) cfg.n_real = j["n_real"].get<int>();
        if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("record_profile")) cfg.record_profile = j["record_profile"].get<bool>();
        if (j.contains("eigen_window_half_width"))
            cfg.eigen_window_half_width = j["eigen_window_half_width"].get<double>();
        if (j.contains("eigen_center_max"))
            cfg.eigen_center_max = j["eigen_center_max"].get<double>();
        if (j.contains("eigen_ell_min")) cfg.eigen_ell_min = j["eigen_ell_min"].get<double>();
        if (j.contains("eigen_ell_max")) cfg.eigen_ell_max = j["eigen_ell_max"].get<double>();
        if (j.contains("eigen_decay_realizations"))
            cfg.eigen_decay_realizations = j["eigen_decay_realizations"].get<int>();
    } catch (const json::exception& e) {
        throw ParameterError("config " + path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j{
        {"L", cfg.base.L},
        {"L_a", cfg.base.L_a},
        {"eta_a", cfg.base.eta_a},
        {"n_c", cfg.base.n_c},
        {"W", cfg.W_list},
        {"g", cfg.g_list},
        {"L0", cfg.L0_list},
        {"shape", cfg.shape == Shape::Square ? "square" : "gaussian"},
        {"phases", cfg.phases == Phases::RandomUniform ? "random" : "coherent"},
        {"dt", cfg.integ.dt},
        {"nl_iters", cfg.integ.nl_iters},
        {"nl_tol", cfg.integ.nl_tol},
        {"t_min", cfg.t_min},
        {"t_max", cfg.t_max},
        {"points_per_decade", cfg.points_per_decade},
        {"max_samples", cfg.max_samples},
        {"n_real", cfg.n_real},
        {"master_seed", cfg.master_seed},
        {"record_profile", cfg.record_profile},
    };
    return j.dump(2);
}

void apply_paper_scale(RunConfig& cfg) {
    cfg.t_max = 1e5;
    cfg.n_real = 1000;
}

EnsembleSpec make_spec(const RunConfig& cfg, double W, double g, int L0) {
    EnsembleSpec spec;
    spec.params = cfg.base;
    spec.params.W = W;
    spec.params.g = g;
    spec.init.shape = cfg.shape;
    spec.init.phases = cfg.phases;
    spec.init.L0 = L0;
    spec.cfg = cfg.integ;
    spec.schedule = RecordingSchedule::logspaced(cfg.t_min, cfg.t_max,
                                                 cfg.points_per_decade, cfg.max_samples);
    spec.n_real = cfg.n_real;
    spec.master_seed = cfg.master_seed;
    spec.record_profile = cfg.record_profile;
    return spec;
}

std::string trace_stem(double W, int L0, double g) {
    std::ostringstream ss;
    ss << "trace_W" << fmt(W) << "_L0" << L0 << "_g" << fmt(g);
    return ss.str();
}

void write_trace(const fs::path& dir, const SurvivalTrace& trace) {
    const std::string stem = trace_stem(trace.spec.params.W, trace.spec.init.L0,
                                        trace.spec.params.g);
    auto csv = open_out(dir / (stem + ".csv"));
    csv << "t,p_mean,p_stderr\n";
    for (std::size_t k = 0; k < trace.t.size(); ++k)
        csv << fmt(trace.t[k]) << ',' << fmt(trace.p_mean[k]) << ','
            << fmt(trace.p_stderr[k]) << '\n';

    json side{
        {"artifact_version", kVersion},
        {"spec", spec_to_json(trace.spec)},
        {"fingerprint", trace.fp},
        {"n_real", trace.n_real},
    };
    open_out(dir / (stem + ".json")) << side.dump(2) << '\n';
}

SurvivalTrace read_trace(const fs::path& csv_path) {
    fs::path side_path = csv_path;
    side_path.replace_extension(".json");
    if (!fs::exists(side_path))
        throw Error("missing sidecar for " + csv_path.string());
    json side;
    open_in(side_path) >> side;

    SurvivalTrace trace;
    trace.spec = spec_from_json(side.at("spec"));
    trace.fp = side.at("fingerprint").get<std::uint64_t>();
    trace.n_real = side.at("n_real").get<int>();
    if (trace.fp != fingerprint(trace.spec))
        throw Error("sidecar fingerprint mismatch for " + csv_path.string());

    std::vector<std::string> header;
    for (const auto& row : read_csv(csv_path, &header)) {
        if (row.size() != 3) throw Error("bad trace row in " + csv_path.string());
        trace.t.push_back(parse_double(row[0]));
        trace.p_mean.push_back(parse_double(row[1]));
        trace.p_stderr.push_back(parse_double(row[2]));
    }
    return trace;
}

void write_fit_table(const fs::path& csv_path, const std::vector<FitRow>& rows) {
    auto out = open_out(csv_path);
    out << "g,W,L0,ell_eff,t2,ell_a,residual,n_points,t_min,t_max,converged,no_loss\n";
    for (const auto& r : rows)
        out << fmt(r.g) << ',' << fmt(r.W) << ',' << r.L0 << ',' << fmt(r.fit.ell_eff)
            << ',' << fmt(r.fit.t2) << ',' << fmt(r.fit.ell_a) << ','
            << fmt(r.fit.residual) << ',' << r.fit.n_points << ',' << fmt(r.fit.t_min)
            << ',' << fmt(r.fit.t_max) << ',' << (r.fit.converged ? 1 : 0) << ','
            << (r.fit.no_loss ? 1 : 0) << '\n';
}

void write_fit_json(const fs::path& json_path, const std::vector<FitRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"g", r.g},
                           {"W", r.W},
                           {"L0", r.L0},
                           {"ell_eff", r.fit.ell_eff},
                           {"t2", r.fit.t2},
                           {"ell_a", r.fit.ell_a},
                           {"residual", r.fit.residual},
                           {"n_points", r.fit.n_points},
                           {"t_min", r.fit.t_min},
                           {"t_max", r.fit.t_max},
                           {"converged", r.fit.converged},
                           {"no_loss", r.fit.no_loss}});
    open_out(json_path) << json{{"artifact_version", kVersion}, {"fits", arr}}.dump(2)
                        << '\n';
}

std::vector<FitRow> read_fit_table(const fs::path& csv_path) {
    std::vector<FitRow> rows;
    std::vector<std::string> header;
    for (const auto& row : read_csv(csv_path, &header)) {
        if (row.size() != 12) throw Error("bad fit row in " + csv_path.string());
        FitRow r;
        r.g = parse_double(row[0]);
        r.W = parse_double(row[1]);
        r.L0 = static_cast<int>(parse_double(row[2]));
        r.fit.ell_eff = parse_double(row[3]);
        r.fit.t2 = parse_double(row[4]);
        r.fit.ell_a = parse_double(row[5]);
        r.fit.residual = parse_double(row[6]);
        r.fit.n_points = static_cast<int>(parse_double(row[7]));
        r.fit.t_min = parse_double(row[8]);
        r.fit.t_max = parse_double(row[9]);
        r.fit.converged = parse_double(row[10]) != 0.0;
        r.fit.no_loss = parse_double(row[11]) != 0.0;
        rows.push_back(r);
    }
    return rows;
}

void write_scaled_table(const fs::path& csv_path, const std::vector<ScaledPoint>& points) {
    auto out = open_out(csv_path);
    out << "g_tilde,ell_tilde,g,W,L0\n";
    for (const auto& p : points)
        out << fmt(p.g_tilde) << ',' << fmt(p.ell_tilde) << ',' << fmt(p.g) << ','
            << fmt(p.W) << ',' << p.L0 << '\n';
}

std::vector<ScaledPoint> read_scaled_table(const fs::path& csv_path) {
    std::vector<ScaledPoint> points;
    std::vector<std::string> header;
    for (const auto& row : read_csv(csv_path, &header)) {
        if (row.size() != 5) throw Error("bad scaled row in " + csv_path.string());
        ScaledPoint p;
        p.g_tilde = parse_double(row[0]);
        p.ell_tilde = parse_double(row[1]);
        p.g = parse_double(row[2]);
        p.W = parse_double(row[3]);
        p.L0 = static_cast<int>(parse_double(row[4]));
        points.push_back(p);
    }
    return points;
}

void write_spectra_csv(
    const fs::path& csv_path,
    const std::vector<std::pair<std::uint64_t, std::vector<EigenPair>>>& spectra) {
    auto out = open_out(csv_path);
    out << "seed,index,E,n_center,ell\n";
    for (const auto& [seed, pairs] : spectra)
        for (std::size_t k = 0; k < pairs.size(); ++k)
            out << seed << ',' << k << ',' << fmt(pairs[k].E) << ','
                << fmt(pairs[k].n_center) << ',' << fmt(pairs[k].ell) << '\n';
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path,
                                               std::vector<std::string>* header) {
    auto in = open_in(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            if (header) *header = fields;
            first = false;
        } else {
            rows.push_back(std::move(fields));
        }
    }
    return rows;
}

}  // namespace danse::io
