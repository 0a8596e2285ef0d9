// Copyright 2026 The spdevo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "spdevo/actuation.hpp"
#include "spdevo/config.hpp"
#include "spdevo/controller.hpp"
#include "spdevo/error.hpp"
#include "spdevo/experiment.hpp"
#include "spdevo/grid.hpp"
#include "spdevo/models.hpp"
#include "spdevo/noise.hpp"

namespace py = pybind11;
using namespace spdevo;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a)
{
    return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v)
{
    Array out(static_cast<py::ssize_t>(v.size()));
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
    return out;
}

ControlSequence to_sequence(const Array& u, double dt)
{
    if (u.ndim() != 2) throw DimensionError("control sequence must be a (bins, actuators) array");
    ControlSequence seq(static_cast<std::size_t>(u.shape(0)), static_cast<std::size_t>(u.shape(1)), dt);
    std::memcpy(seq.flat().data(), u.data(), seq.flat().size() * sizeof(double));
    return seq;
}

py::dict result_dict(const ExperimentResult& res)
{
    py::list regions;
    for (std::size_t r = 0; r < res.regions.size(); ++r) {
        py::dict d;
        d["name"] = res.config.cost.regions[r].name;
        d["desired"] = res.config.cost.regions[r].desired;
        d["rmse"] = res.regions[r].rmse;
        d["avg_sigma"] = res.regions[r].avg_sigma;
        regions.append(d);
    }
    py::dict out;
    out["experiment"] = res.config.name;
    out["mode"] = std::string(to_string(res.mode));
    out["trials"] = res.trials.size();
    out["regions"] = regions;
    out["mean_profile"] = to_array(res.mean_profile);
    out["trial_rmse"] = res.trial_rmse;
    std::vector<double> costs;
    for (const auto& t : res.trials) costs.push_back(t.realized_cost);
    out["realized_cost"] = to_array(costs);
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Sampling-based variational control of discretized SPDEs";

    auto base = py::register_exception<Error>(m, "SpdevoError", PyExc_RuntimeError);
    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", config_error.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
    py::register_exception<DegenerateActuationError>(m, "DegenerateActuationError", base.ptr());
    py::register_exception<DegenerateBatchError>(m, "DegenerateBatchError", base.ptr());
    py::register_exception<MetricsError>(m, "MetricsError", base.ptr());

    py::class_<Grid1D>(m, "Grid1D")
        .def(py::init<double, std::size_t>(), py::arg("length"), py::arg("intervals"))
        .def_property_readonly("length", &Grid1D::length)
        .def_property_readonly("intervals", &Grid1D::intervals)
        .def_property_readonly("spacing", &Grid1D::spacing)
        .def_property_readonly("node_count", &Grid1D::node_count)
        .def_property_readonly("nodes", [](const Grid1D& g) { return to_array({g.nodes().begin(), g.nodes().end()}); });

    m.def("make_grid_1d", &make_grid_1d, py::arg("length"), py::arg("intervals"));
    m.def(
        "inner_product",
        [](const Array& f, const Array& g, const Grid1D& grid) { return inner_product(to_vector(f), to_vector(g), grid); },
        py::arg("f"), py::arg("g"), py::arg("grid"));

    m.def("basis_eval", &basis_eval, py::arg("j"), py::arg("x"), py::arg("length"));
    m.def(
        "sample_field_increments",
        [](const Grid1D& grid, double dt, std::size_t count, std::uint64_t seed, std::size_t modes, double decay) {
            const SpectralBasis1D basis(grid, modes ? modes : grid.intervals(),
                                        eigenvalue_profile(modes ? modes : grid.intervals(), decay));
            const NormalStream stream(StreamKey{seed, 0, StreamPhase::Test, 0, 0, 0});
            py::array_t<double> out({static_cast<py::ssize_t>(count), static_cast<py::ssize_t>(grid.node_count())});
            auto view = out.mutable_unchecked<2>();
            for (std::size_t b = 0; b < count; ++b) {
                const auto w = assemble_field_increment(sample_mode_increments(basis.modes(), dt, stream, b), basis);
                for (std::size_t k = 0; k < w.size(); ++k) view(static_cast<py::ssize_t>(b), static_cast<py::ssize_t>(k)) = w[k];
            }
            return out;
        },
        py::arg("grid"), py::arg("dt"), py::arg("count"), py::arg("seed") = 0, py::arg("modes") = 0,
        py::arg("decay") = 0.0, "Draws `count` noise increments dW on the grid nodes (one row each).");

    m.def("nagumo_reaction", &nagumo_reaction, py::arg("h"), py::arg("alpha"));
    m.def("nagumo_initial_profile", &nagumo_initial_profile, py::arg("x"));
    m.def(
        "burgers_advection", [](const Array& h, const Grid1D& g) { return to_array(burgers_advection(to_vector(h), g)); },
        py::arg("h"), py::arg("grid"));
    m.def(
        "simulate",
        [](const std::string& kind, const Grid1D& grid, const Array& h0, double dt, std::size_t steps, double diffusivity,
           double alpha, const std::string& boundary, double boundary_value) {
            ModelSpec spec;
            spec.kind = parse_model_kind(kind);
            spec.diffusivity = diffusivity;
            spec.alpha = alpha;
            spec.boundary = boundary == "neumann" ? BoundaryCondition::neumann(boundary_value)
                                                  : BoundaryCondition::dirichlet(boundary_value);
            const Stepper1D stepper(grid, spec, dt);
            StepWorkspace ws;
            auto h = to_vector(h0);
            if (h.size() != grid.node_count()) throw DimensionError("initial state does not match the grid");
            for (std::size_t n = 0; n < steps; ++n) {
                if (!stepper.step(h, {}, {}, {}, ws)) throw DivergenceError("state became non-finite", n);
            }
            return to_array(h);
        },
        py::arg("kind"), py::arg("grid"), py::arg("h0"), py::arg("dt"), py::arg("steps"), py::arg("diffusivity") = 1.0,
        py::arg("alpha") = 0.0, py::arg("boundary") = "dirichlet", py::arg("boundary_value") = 0.0,
        "Deterministic, uncontrolled semi-implicit run of a 1-D model; returns the final state.");

    m.def("actuator_value", py::overload_cast<double, double, double>(&actuator_value), py::arg("x"),
          py::arg("center"), py::arg("width"));
    m.def(
        "gram_matrix",
        [](const Grid1D& grid, std::vector<double> centers, std::vector<double> widths) {
            return ActuatorSet(grid, std::move(centers), std::move(widths)).gram();
        },
        py::arg("grid"), py::arg("centers"), py::arg("widths"));

    m.def(
        "gibbs_weights",
        [](const Array& costs, double rho) { return to_array(gibbs_weights(to_vector(costs), rho).weights); },
        py::arg("costs"), py::arg("rho"));
    m.def(
        "girsanov_correction",
        [](const Array& u, const Array& du, const Eigen::MatrixXd& gram, double rho, double dt) {
            return girsanov_correction(to_sequence(u, dt), to_vector(du), gram, rho, dt);
        },
        py::arg("u"), py::arg("delta_u"), py::arg("gram"), py::arg("rho"), py::arg("dt"));
    m.def(
        "control_update",
        [](const Array& u, const Array& delta_u, const Array& weights, const Eigen::MatrixXd& gram, double rho,
           double dt) {
            const auto seq = to_sequence(u, dt);
            RolloutBatch batch(static_cast<std::size_t>(weights.size()), seq.bins(), seq.actuators());
            batch.delta_u = to_vector(delta_u);
            batch.weights = to_vector(weights);
            const auto next = control_update(seq, batch, Eigen::LLT<Eigen::MatrixXd>(gram), rho, dt);
            py::array_t<double> out({static_cast<py::ssize_t>(next.bins()), static_cast<py::ssize_t>(next.actuators())});
            std::memcpy(out.mutable_data(), next.flat().data(), next.flat().size() * sizeof(double));
            return out;
        },
        py::arg("u"), py::arg("delta_u"), py::arg("weights"), py::arg("gram"), py::arg("rho"), py::arg("dt"),
        "delta_u has shape (rollouts, bins, actuators).");
    m.def("effective_sample_size", [](const Array& w) { return effective_sample_size(to_vector(w)); }, py::arg("weights"));

    m.def(
        "compute_metrics",
        [](const std::vector<std::vector<double>>& profiles, const Array& desired, const std::vector<std::uint8_t>& mask) {
            const auto r = compute_metrics(profiles, to_vector(desired), mask);
            return py::make_tuple(r.rmse, r.avg_sigma);
        },
        py::arg("profiles"), py::arg("desired"), py::arg("mask"), "Returns (rmse, avg_sigma).");

    m.def(
        "validate_config",
        [](const std::filesystem::path& path) {
            const auto cfg = load_config(path);
            cfg.validate();
            return cfg.warnings();
        },
        py::arg("path"), "Loads and validates a config; returns its warnings.");
    m.def("bundled_config_dir", &bundled_config_dir);
    m.def("list_experiments", [] {
        py::list out;
        for (const auto& e : list_experiments()) out.append(py::make_tuple(e.name, e.description, e.path));
        return out;
    });
    m.def(
        "run_experiment",
        [](const std::filesystem::path& path, std::optional<std::string> mode, std::optional<std::uint64_t> seed,
           std::optional<std::size_t> trials, std::optional<std::filesystem::path> out,
           std::optional<std::size_t> workers) {
            RunOverrides ov;
            if (mode) ov.mode = parse_control_mode(*mode);
            ov.seed = seed;
            ov.trials = trials;
            ov.out = out;
            ov.workers = workers;
            ov.write_files = out.has_value();
            const auto cfg = load_config(path);
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(cfg, ov);
            }
            return result_dict(res);
        },
        py::arg("config"), py::arg("mode") = py::none(), py::arg("seed") = py::none(), py::arg("trials") = py::none(),
        py::arg("out") = py::none(), py::arg("workers") = py::none(),
        "Runs an experiment config. CSV artifacts are written only when `out` is given.");
}
