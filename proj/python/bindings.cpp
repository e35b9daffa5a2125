#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "danse/ensemble.hpp"
#include "danse/fit.hpp"
#include "danse/io.hpp"
#include "danse/observables.hpp"
#include "danse/spectral.hpp"

namespace py = pybind11;
using namespace danse;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Disordered nonlinear lattice dynamics in an absorbing box";
    m.attr("__version__") = io::kVersion;

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<StepError>(m, "StepError", PyExc_RuntimeError);
    py::register_exception<EnsembleError>(m, "EnsembleError", PyExc_RuntimeError);
    py::register_exception<MergeError>(m, "MergeError", PyExc_ValueError);
    py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

    py::enum_<Shape>(m, "Shape")
        .value("Square", Shape::Square)
        .value("Gaussian", Shape::Gaussian);
    py::enum_<Phases>(m, "Phases")
        .value("RandomUniform", Phases::RandomUniform)
        .value("Coherent", Phases::Coherent);

    py::class_<LatticeParams>(m, "LatticeParams")
        .def(py::init([](int L, int L_a, double eta_a, double n_c, double W, double g) {
                 LatticeParams p{L, L_a, eta_a, n_c, W, g};
                 p.validate();
                 return p;
             }),
             py::arg("L") = 101, py::arg("L_a") = 10, py::arg("eta_a") = 0.1,
             py::arg("n_c") = 10.0 / 3.0, py::arg("W") = 2.0, py::arg("g") = 0.0)
        .def_readwrite("L", &LatticeParams::L)
        .def_readwrite("L_a", &LatticeParams::L_a)
        .def_readwrite("eta_a", &LatticeParams::eta_a)
        .def_readwrite("n_c", &LatticeParams::n_c)
        .def_readwrite("W", &LatticeParams::W)
        .def_readwrite("g", &LatticeParams::g)
        .def("validate", &LatticeParams::validate)
        .def_property_readonly("grid_size", &LatticeParams::grid_size)
        .def_property_readonly("box_half", &LatticeParams::box_half);

    py::class_<DisorderRealization>(m, "DisorderRealization")
        .def_readonly("v", &DisorderRealization::v)
        .def_readonly("seed", &DisorderRealization::seed);

    py::class_<WaveState>(m, "WaveState")
        .def(py::init<>())
        .def_readwrite("c", &WaveState::c)
        .def_readwrite("t", &WaveState::t)
        .def("norm", &WaveState::norm);

    py::class_<InitialStateSpec>(m, "InitialStateSpec")
        .def(py::init([](Shape shape, int L0, Phases phases, std::uint64_t seed) {
                 InitialStateSpec s{shape, L0, phases, seed};
                 s.validate();
                 return s;
             }),
             py::arg("shape") = Shape::Square, py::arg("L0") = 21,
             py::arg("phases") = Phases::RandomUniform, py::arg("seed") = 0)
        .def_readwrite("shape", &InitialStateSpec::shape)
        .def_readwrite("L0", &InitialStateSpec::L0)
        .def_readwrite("phases", &InitialStateSpec::phases)
        .def_readwrite("seed", &InitialStateSpec::seed);

    py::class_<IntegratorConfig>(m, "IntegratorConfig")
        .def(py::init([](double dt, int nl_iters, double nl_tol) {
                 IntegratorConfig c{dt, nl_iters, nl_tol};
                 c.validate();
                 return c;
             }),
             py::arg("dt") = 0.05, py::arg("nl_iters") = 10, py::arg("nl_tol") = 1e-10)
        .def_readwrite("dt", &IntegratorConfig::dt)
        .def_readwrite("nl_iters", &IntegratorConfig::nl_iters)
        .def_readwrite("nl_tol", &IntegratorConfig::nl_tol);

    py::class_<RecordingSchedule>(m, "RecordingSchedule")
        .def(py::init([](std::vector<double> times) {
                 RecordingSchedule s{std::move(times)};
                 s.validate();
                 return s;
             }),
             py::arg("times"))
        .def_static("logspaced", &RecordingSchedule::logspaced, py::arg("t_min"),
                    py::arg("t_max"), py::arg("ppd") = 64, py::arg("max_samples") = 400)
        .def_readonly("times", &RecordingSchedule::times);

    m.def("sample_disorder", &sample_disorder, py::arg("params"), py::arg("seed"));
    m.def("absorber_potential", &absorber_potential, py::arg("n"), py::arg("params"));
    m.def("make_initial_state", &make_initial_state, py::arg("spec"), py::arg("params"));
    m.def("apply_hamiltonian",
          py::overload_cast<const WaveState&, const DisorderRealization&,
                            const LatticeParams&>(&apply_hamiltonian),
          py::arg("state"), py::arg("dis"), py::arg("params"));
    m.def("anderson_localization_length", &anderson_localization_length, py::arg("W"),
          py::arg("nu"));

    m.def("step", &step, py::arg("state"), py::arg("dis"), py::arg("params"),
          py::arg("cfg"));
    m.def(
        "evolve",
        [](const WaveState& state, const DisorderRealization& dis,
           const LatticeParams& params, const IntegratorConfig& cfg,
           const RecordingSchedule& schedule, const std::vector<Observer>& observers,
           double t_end) {
            return evolve(state, dis, params, cfg, schedule, observers, t_end);
        },
        py::arg("state"), py::arg("dis"), py::arg("params"), py::arg("cfg"),
        py::arg("schedule"), py::arg("observers"), py::arg("t_end"));
    m.def("energy", &energy, py::arg("state"), py::arg("dis"), py::arg("params"));

    m.def("survival_probability", &survival_probability, py::arg("state"),
          py::arg("params"));
    m.def("participation_number", &participation_number, py::arg("state"),
          py::arg("params"));
    m.def("second_moment", &second_moment, py::arg("state"), py::arg("params"));

    py::class_<EigenPair>(m, "EigenPair")
        .def_readonly("E", &EigenPair::E)
        .def_readonly("psi", &EigenPair::psi)
        .def_readonly("n_center", &EigenPair::n_center)
        .def_readonly("ell", &EigenPair::ell);
    m.def("diagonalize_anderson", &diagonalize_anderson, py::arg("dis"), py::arg("params"));
    m.def("band_position", &band_position, py::arg("E"));
    m.def("eigenstate_decay_trace", &eigenstate_decay_trace, py::arg("pair"),
          py::arg("dis"), py::arg("params"), py::arg("cfg"), py::arg("schedule"));
    m.def("fit_decay_time", &fit_decay_time, py::arg("times"), py::arg("alphas"));
    m.def("fit_tnu_law", &fit_tnu_law, py::arg("pairs"), py::arg("ell_a"),
          py::arg("ell_0"));

    py::class_<EnsembleSpec>(m, "EnsembleSpec")
        .def(py::init<>())
        .def_readwrite("params", &EnsembleSpec::params)
        .def_readwrite("init", &EnsembleSpec::init)
        .def_readwrite("cfg", &EnsembleSpec::cfg)
        .def_readwrite("schedule", &EnsembleSpec::schedule)
        .def_readwrite("n_real", &EnsembleSpec::n_real)
        .def_readwrite("master_seed", &EnsembleSpec::master_seed)
        .def_readwrite("record_profile", &EnsembleSpec::record_profile);
    py::class_<SurvivalTrace>(m, "SurvivalTrace")
        .def(py::init<>())
        .def_readwrite("t", &SurvivalTrace::t)
        .def_readwrite("p_mean", &SurvivalTrace::p_mean)
        .def_readwrite("p_stderr", &SurvivalTrace::p_stderr)
        .def_readwrite("n_real", &SurvivalTrace::n_real)
        .def_readwrite("spec", &SurvivalTrace::spec)
        .def_readonly("fingerprint", &SurvivalTrace::fp);
    py::class_<EnsembleResult>(m, "EnsembleResult")
        .def_readonly("trace", &EnsembleResult::trace)
        .def_readonly("mean_final_profile", &EnsembleResult::mean_final_profile);
    m.def("run_ensemble", &run_ensemble, py::arg("spec"), py::arg("jobs") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("merge", &merge, py::arg("traces"));
    m.def("fingerprint", &fingerprint, py::arg("spec"));

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("ell_eff", &FitResult::ell_eff)
        .def_readonly("t2", &FitResult::t2)
        .def_readonly("ell_a", &FitResult::ell_a)
        .def_readonly("residual", &FitResult::residual)
        .def_readonly("t_min", &FitResult::t_min)
        .def_readonly("t_max", &FitResult::t_max)
        .def_readonly("n_points", &FitResult::n_points)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("no_loss", &FitResult::no_loss);
    py::class_<ScaledPoint>(m, "ScaledPoint")
        .def_readonly("g_tilde", &ScaledPoint::g_tilde)
        .def_readonly("ell_tilde", &ScaledPoint::ell_tilde)
        .def_readonly("g", &ScaledPoint::g)
        .def_readonly("W", &ScaledPoint::W)
        .def_readonly("L0", &ScaledPoint::L0);
    py::class_<CollapseReport>(m, "CollapseReport")
        .def_readonly("g_tilde_bins", &CollapseReport::g_tilde_bins)
        .def_readonly("cv_scaled", &CollapseReport::cv_scaled)
        .def_readonly("cv_unscaled", &CollapseReport::cv_unscaled)
        .def_readonly("n_groups", &CollapseReport::n_groups);
    py::class_<CrossoverResult>(m, "CrossoverResult")
        .def_readonly("has_g_c", &CrossoverResult::has_g_c)
        .def_readonly("g_c", &CrossoverResult::g_c)
        .def_readonly("g_c_unc", &CrossoverResult::g_c_unc)
        .def_readonly("has_g_st", &CrossoverResult::has_g_st)
        .def_readonly("g_st", &CrossoverResult::g_st)
        .def_readonly("g_st_unc", &CrossoverResult::g_st_unc)
        .def_readonly("plateau", &CrossoverResult::plateau);

    m.def("effective_absorber_distance", &effective_absorber_distance, py::arg("L"),
          py::arg("L0"), py::arg("ell_0"));
    m.def("model_p_nonlinear", &model_p_nonlinear, py::arg("t"), py::arg("ell_eff"),
          py::arg("t2"), py::arg("ell_a"));
    m.def("model_p_linear", &model_p_linear, py::arg("t"), py::arg("ell_0"),
          py::arg("t2"), py::arg("ell_a"));
    m.def(
        "fit_survival",
        [](const SurvivalTrace& trace, double ell_a, std::optional<double> fix_ell_eff) {
            FitOptions opts;
            opts.fix_ell_eff = fix_ell_eff;
            return fit_survival(trace, ell_a, opts);
        },
        py::arg("trace"), py::arg("ell_a"), py::arg("fix_ell_eff") = std::nullopt);
    m.def("scale_point", &scale_point, py::arg("g"), py::arg("W"), py::arg("L0"),
          py::arg("ell_eff"));
    m.def("unscale_point", &unscale_point, py::arg("point"));
    m.def("collapse_quality", &collapse_quality, py::arg("points"),
          py::arg("n_bins") = 12);
    m.def("detect_crossovers", &detect_crossovers, py::arg("curve"));
}
