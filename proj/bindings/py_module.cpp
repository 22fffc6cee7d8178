// collapse_lab._core: python bindings for the main operations.

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "collapse_lab/experiments.hpp"
#include "collapse_lab/io.hpp"
#include "collapse_lab/stats.hpp"
#include "collapse_lab/version.hpp"

namespace py = pybind11;
using namespace clab;

namespace {

void register_errors(py::module_& m) {
    auto& domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<CapacityError>(m, "CapacityError", domain.ptr());
    py::register_exception<StepBudgetError>(m, "StepBudgetError", PyExc_RuntimeError);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monte Carlo toolkit for an amplitude-transfer collapse model";
    m.attr("__version__") = kToolVersion;

    register_errors(m);

    py::enum_<Basis>(m, "Basis").value("X", Basis::X).value("Z", Basis::Z);

    py::enum_<ParityClass>(m, "ParityClass")
        .value("EVEN", ParityClass::EVEN)
        .value("ODD", ParityClass::ODD);

    py::enum_<Branch>(m, "Branch")
        .value("INTERACTING", Branch::INTERACTING)
        .value("NONINTERACTING", Branch::NONINTERACTING);

    py::enum_<SequencingMode>(m, "SequencingMode")
        .value("DISTINCT_S", SequencingMode::DISTINCT_S)
        .value("FORCED_SAME_S", SequencingMode::FORCED_SAME_S);

    py::enum_<EmziChannel>(m, "EmziChannel")
        .value("SS", EmziChannel::SS)
        .value("AA", EmziChannel::AA)
        .value("SA", EmziChannel::SA)
        .value("AS", EmziChannel::AS)
        .value("NONINTERACTING", EmziChannel::NONINTERACTING);

    py::class_<PureState>(m, "PureState")
        .def(py::init<int, std::vector<Amplitude>, std::vector<Basis>>(), py::arg("n_particles"),
             py::arg("amplitudes"), py::arg("basis_tags"))
        .def_property_readonly("n_particles", &PureState::n_particles)
        .def_property_readonly("dim", &PureState::dim)
        .def_property_readonly("amplitudes",
                               [](const PureState& s) { return s.amplitudes(); })
        .def_property_readonly("basis_tags", &PureState::basis_tags)
        .def("norm_sq", &PureState::norm_sq)
        .def("outcome_bitstring", &PureState::outcome_bitstring, py::arg("index"))
        .def_static("bit_is_down", &PureState::bit_is_down, py::arg("index"), py::arg("particle"))
        .def("__repr__", [](const PureState& s) {
            return "<PureState n_particles=" + std::to_string(s.n_particles()) + ">";
        });

    py::class_<BranchDecomposition>(m, "BranchDecomposition")
        .def_readonly("interacting_set", &BranchDecomposition::interacting_set)
        .def_readonly("noninteracting_set", &BranchDecomposition::noninteracting_set)
        .def_readonly("mass_interacting", &BranchDecomposition::mass_interacting)
        .def_readonly("mass_noninteracting", &BranchDecomposition::mass_noninteracting)
        .def("is_degenerate", &BranchDecomposition::is_degenerate);

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("master_seed"), py::arg("trial_index"))
        .def_static("for_trial", &RngStream::for_trial, py::arg("master_seed"), py::arg("trial_index"))
        .def("next_u64", &RngStream::next_u64)
        .def("next_unit", &RngStream::next_unit)
        .def("next_coin", &RngStream::next_coin);

    py::class_<CollapseConfig>(m, "CollapseConfig")
        .def(py::init([](double delta_ave, std::uint64_t master_seed, SequencingMode mode) {
                 CollapseConfig c;
                 c.delta_ave = delta_ave;
                 c.master_seed = master_seed;
                 c.sequencing_mode = mode;
                 c.validate();
                 return c;
             }),
             py::arg("delta_ave"), py::arg("master_seed") = 0,
             py::arg("sequencing_mode") = SequencingMode::DISTINCT_S)
        .def_readwrite("delta_ave", &CollapseConfig::delta_ave)
        .def_readwrite("master_seed", &CollapseConfig::master_seed)
        .def_readwrite("sequencing_mode", &CollapseConfig::sequencing_mode)
        .def("validate", &CollapseConfig::validate);

    py::class_<WalkResult>(m, "WalkResult")
        .def_readonly("absorbed_branch", &WalkResult::absorbed_branch)
        .def_readonly("steps", &WalkResult::steps)
        .def_readonly("trajectory", &WalkResult::trajectory);

    // state-core operations
    m.def("make_initial_state", &make_initial_state, py::arg("n_detectors"),
          py::arg("max_particles") = kDefaultMaxParticles);
    m.def("apply_controlled_flip", &apply_controlled_flip, py::arg("state"), py::arg("target"),
          py::arg("control") = 0);
    m.def("change_basis", &change_basis, py::arg("state"), py::arg("particle_indices"));
    m.def("born_probabilities", &born_probabilities, py::arg("state"));
    m.def("branch_decompose", &branch_decompose, py::arg("state"), py::arg("interacting"));
    m.def("parity_classify", &parity_classify, py::arg("outcome"), py::arg("begin"), py::arg("end"));
    m.def("sample_outcome", &sample_outcome, py::arg("state"), py::arg("rng"));

    // collapse engine
    m.def("clamped_mass_step", &clamped_mass_step, py::arg("mass_interacting"), py::arg("delta"),
          py::arg("move_up"));
    m.def(
        "run_walk",
        [](double p0, const CollapseConfig& config, std::uint64_t trial_index, std::uint64_t max_steps,
           bool record_trajectory) {
            RngStream rng = RngStream::for_trial(config.master_seed, trial_index);
            return run_walk(p0, config, rng, max_steps, record_trajectory);
        },
        py::arg("p0"), py::arg("config"), py::arg("trial_index") = 0,
        py::arg("max_steps") = kDefaultWalkStepBudget, py::arg("record_trajectory") = false);
    m.def("mass_rms_deviation", &mass_rms_deviation, py::arg("p0"), py::arg("delta"), py::arg("n_steps"),
          py::arg("trials"), py::arg("master_seed"));

    // experiment reports
    py::class_<BellParityReport>(m, "BellParityReport")
        .def_readonly("n_detectors", &BellParityReport::n_detectors)
        .def_readonly("trials", &BellParityReport::trials)
        .def_readonly("count_consistent", &BellParityReport::count_consistent)
        .def_readonly("count_collapse_signature", &BellParityReport::count_collapse_signature)
        .def_readonly("r_sup", &BellParityReport::r_sup)
        .def_readonly("collapse_fraction", &BellParityReport::collapse_fraction)
        .def_readonly("confidence_interval", &BellParityReport::confidence_interval)
        .def("__repr__", [](const BellParityReport& r) {
            return "<BellParityReport N=" + std::to_string(r.n_detectors) +
                   " r_sup=" + std::to_string(r.r_sup) + ">";
        });

    py::class_<EprReport>(m, "EprReport")
        .def_readonly("trials", &EprReport::trials)
        .def_readonly("measured_side_a", &EprReport::measured_side_a)
        .def_readonly("chain_length", &EprReport::chain_length)
        .def_readonly("count_b_up", &EprReport::count_b_up)
        .def_readonly("count_b_down", &EprReport::count_b_down)
        .def_readonly("count_anticorrelated", &EprReport::count_anticorrelated)
        .def("b_marginal", &EprReport::b_marginal);

    py::class_<EmziReport>(m, "EmziReport")
        .def_readonly("trials", &EmziReport::trials)
        .def_readonly("r_branch", &EmziReport::r_branch)
        .def_readonly("delta_ave", &EmziReport::delta_ave)
        .def_readonly("channel_counts", &EmziReport::channel_counts)
        .def_readonly("p_SS", &EmziReport::p_SS)
        .def_readonly("p_AA", &EmziReport::p_AA)
        .def_readonly("p_SA", &EmziReport::p_SA)
        .def_readonly("p_AS", &EmziReport::p_AS)
        .def_readonly("p_noninteracting", &EmziReport::p_noninteracting)
        .def_readonly("detection_probability", &EmziReport::detection_probability)
        .def_readonly("cross_fraction", &EmziReport::cross_fraction)
        .def_readonly("analytic_cross_fraction", &EmziReport::analytic_cross_fraction);

    py::class_<WalkReport>(m, "WalkReport")
        .def_readonly("trials", &WalkReport::trials)
        .def_readonly("p0", &WalkReport::p0)
        .def_readonly("delta_ave", &WalkReport::delta_ave)
        .def_readonly("count_interacting", &WalkReport::count_interacting)
        .def_readonly("total_steps", &WalkReport::total_steps)
        .def_readonly("freq_interacting", &WalkReport::freq_interacting)
        .def_readonly("mean_steps", &WalkReport::mean_steps)
        .def_readonly("expected_steps", &WalkReport::expected_steps);

    m.def(
        "run_bell_parity",
        [](int n_detectors, std::uint64_t trials, const CollapseConfig& config, unsigned workers) {
            return run_bell_parity(n_detectors, trials, config, workers);
        },
        py::arg("n_detectors"), py::arg("trials"), py::arg("config"), py::arg("workers") = 1,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "run_epr_no_signaling",
        [](std::uint64_t trials, const CollapseConfig& config, bool measure_side_a, unsigned workers,
           std::uint64_t chain_length) {
            return run_epr_no_signaling(trials, config, measure_side_a, workers, chain_length);
        },
        py::arg("trials"), py::arg("config"), py::arg("measure_side_a"), py::arg("workers") = 1,
        py::arg("chain_length") = kDefaultEprChainLength, py::call_guard<py::gil_scoped_release>());
    m.def(
        "run_emzi_mc",
        [](double r_branch, double delta_ave, std::uint64_t trials, const CollapseConfig& config,
           unsigned workers) { return run_emzi_mc(r_branch, delta_ave, trials, config, workers); },
        py::arg("r_branch"), py::arg("delta_ave"), py::arg("trials"), py::arg("config"),
        py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
    m.def(
        "run_walk_ensemble",
        [](double p0, std::uint64_t trials, const CollapseConfig& config, unsigned workers,
           std::uint64_t max_steps) { return run_walk_ensemble(p0, trials, config, workers, max_steps); },
        py::arg("p0"), py::arg("trials"), py::arg("config"), py::arg("workers") = 1,
        py::arg("max_steps") = kDefaultWalkStepBudget, py::call_guard<py::gil_scoped_release>());
    m.def("emzi_analytic_cross_fraction", &emzi_analytic_cross_fraction, py::arg("r_branch"));
    m.def("emzi_channel_probabilities", &emzi_channel_probabilities, py::arg("alpha_prime"),
          py::arg("gamma_prime"));
    m.def("expected_collapse_steps", &expected_collapse_steps, py::arg("p0"), py::arg("delta_ave"));

    // stats
    m.def("superposition_measure",
          [](const std::vector<int>& q) { return superposition_measure(q); }, py::arg("q_values"));
    m.def("wilson_interval", &wilson_interval, py::arg("successes"), py::arg("trials"),
          py::arg("z") = 1.96);
    m.def(
        "tv_distance",
        [](const std::vector<double>& a, const std::vector<double>& b) { return tv_distance(a, b); },
        py::arg("dist_a"), py::arg("dist_b"));
}
