#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heightlab/csbp.hpp"
#include "heightlab/height.hpp"
#include "heightlab/interact.hpp"
#include "heightlab/levypath.hpp"
#include "heightlab/loctime.hpp"
#include "heightlab/mechanism.hpp"
#include "heightlab/rng.hpp"
#include "heightlab/verify.hpp"

namespace py = pybind11;
using namespace hl;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

}  // namespace

PYBIND11_MODULE(_heightlab, m) {
    m.doc() = "Height processes of branching populations with interaction";

    py::class_<LevyMeasure>(m, "LevyMeasure")
        .def_static("zero", &LevyMeasure::zero)
        .def_static("atoms",
                    [](const std::vector<std::pair<double, double>>& zs) {
                        std::vector<Atom> atoms;
                        for (auto& [z, mass] : zs) atoms.push_back({z, mass});
                        return LevyMeasure::atoms(std::move(atoms));
                    },
                    py::arg("atoms"), "atoms as (size, mass) pairs")
        .def_static("truncated_stable", &LevyMeasure::truncated_stable,
                    py::arg("index"), py::arg("scale"),
                    py::arg("cutoff") = kInf)
        .def_static("exponential_density", &LevyMeasure::exponential_density,
                    py::arg("rate"), py::arg("scale"), py::arg("power"))
        .def("tail_mass", &LevyMeasure::tail_mass, py::arg("eps"))
        .def("moment1", &LevyMeasure::moment1, py::arg("lo"),
             py::arg("hi") = kInf)
        .def("moment2", &LevyMeasure::moment2, py::arg("lo"),
             py::arg("hi") = kInf);

    py::class_<Mechanism>(m, "Mechanism")
        .def(py::init<double, double, LevyMeasure, bool>(), py::arg("alpha"),
             py::arg("beta"), py::arg("pi") = LevyMeasure::zero(),
             py::arg("subcritical") = true)
        .def_readonly("alpha", &Mechanism::alpha)
        .def_readonly("beta", &Mechanism::beta)
        .def_readonly("pi", &Mechanism::pi);

    m.def("psi", &psi, py::arg("mech"), py::arg("lam"));
    m.def("phi", &phi, py::arg("mech"), py::arg("u"));
    m.def("seed_split", &seed_split, py::arg("master"), py::arg("worker"),
          py::arg("replicate"));

    py::class_<InteractionFn>(m, "InteractionFn")
        .def("__call__", [](const InteractionFn& f, double z) {
            return f.f(z);
        })
        .def("derivative", [](const InteractionFn& f, double z) {
            return f.fprime(z);
        })
        .def_readonly("theta", &InteractionFn::theta);
    m.def("linear_interaction", &linear_interaction, py::arg("alpha"));
    m.def("logistic_interaction", &logistic_interaction, py::arg("c1"),
          py::arg("c2"));
    m.def("polynomial_interaction", &polynomial_interaction,
          py::arg("coeffs"));
    m.def("localize", &localize, py::arg("f"), py::arg("b"));

    py::enum_<Extinction>(m, "Extinction")
        .value("ExtinctAS", Extinction::ExtinctAS)
        .value("NotExtinctAS", Extinction::NotExtinctAS)
        .value("Inconclusive", Extinction::Inconclusive);
    m.def("extinction_criterion", &extinction_criterion, py::arg("f"),
          py::arg("beta"));

    py::class_<LevyPath>(m, "LevyPath")
        .def_readonly("dt", &LevyPath::dt)
        .def_readonly("alpha", &LevyPath::alpha)
        .def_readonly("beta", &LevyPath::beta)
        .def_property_readonly(
            "values", [](const LevyPath& p) { return to_array(p.values); })
        .def_property_readonly("jumps", [](const LevyPath& p) {
            std::vector<std::pair<std::int64_t, double>> out;
            for (const auto& j : p.jumps) out.emplace_back(j.index, j.z);
            return out;
        });

    py::class_<HeightPath>(m, "HeightPath")
        .def_readonly("dt", &HeightPath::dt)
        .def_readonly("beta", &HeightPath::beta)
        .def_property_readonly(
            "values", [](const HeightPath& h) { return to_array(h.values); });

    m.def(
        "simulate_levy",
        [](const Mechanism& mech, double horizon, double dt, double eps_sim,
           std::uint64_t seed) {
            return simulate_levy(mech, PathBudget::horizon(horizon), dt,
                                 eps_sim, seed);
        },
        py::arg("mech"), py::arg("horizon"), py::arg("dt") = 1e-3,
        py::arg("eps_sim") = 0.01, py::arg("seed") = 1);
    m.def(
        "simulate_levy_first_passage",
        [](const Mechanism& mech, double x, double cap, double dt,
           double eps_sim, std::uint64_t seed) {
            return simulate_levy(mech, PathBudget::first_passage(x, cap), dt,
                                 eps_sim, seed);
        },
        py::arg("mech"), py::arg("x"), py::arg("cap") = 1e3,
        py::arg("dt") = 1e-3, py::arg("eps_sim") = 0.01, py::arg("seed") = 1);
    m.def("height_from_path", &height_from_path, py::arg("path"),
          py::arg("beta"));
    m.def("first_passage_time",
          [](const LevyPath& p, double x) -> py::object {
              auto t = first_passage_time(p, x);
              return t ? py::cast(*t) : py::none();
          },
          py::arg("path"), py::arg("x"));

    m.def(
        "local_time_field",
        [](const HeightPath& h, double delta_t,
           std::vector<double> checkpoints) {
            auto f = local_time_occupation(h, delta_t, std::move(checkpoints));
            std::vector<py::array_t<double>> out;
            for (const auto& e : f.estimates) out.push_back(to_array(e));
            return out;
        },
        py::arg("height"), py::arg("delta_t"), py::arg("checkpoints"));
    m.def("occupation_at_level", &occupation_at_level, py::arg("height"),
          py::arg("t"), py::arg("delta_t"), py::arg("s_index"));

    py::class_<PopulationPath>(m, "PopulationPath")
        .def_readonly("dt_pop", &PopulationPath::dt_pop)
        .def_readonly("x_list", &PopulationPath::x_list)
        .def("steps", &PopulationPath::steps)
        .def("z", &PopulationPath::z, py::arg("i"), py::arg("k"));
    m.def("simulate_csbp", &simulate_csbp, py::arg("f"), py::arg("mech"),
          py::arg("x_list"), py::arg("horizon"), py::arg("dt_pop") = 1e-3,
          py::arg("eps_sim") = 0.01, py::arg("seed") = 1);

    m.def(
        "ks_two_sample",
        [](std::vector<double> a, std::vector<double> b, int n_permutations,
           std::uint64_t seed) {
            auto r = ks_two_sample(a, b, n_permutations, seed);
            return std::make_pair(r.statistic, r.p_value);
        },
        py::arg("a"), py::arg("b"), py::arg("n_permutations") = 200,
        py::arg("seed") = 1);
}
