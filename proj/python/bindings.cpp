#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "steiner/errors.hpp"
#include "steiner/generators.hpp"
#include "steiner/harness.hpp"
#include "steiner/oracle.hpp"

#include <sstream>

namespace py = pybind11;
using namespace steiner;

namespace {

using EdgeList = std::vector<std::tuple<int, int, Weight>>;

WeightedGraph build_graph(int n, const EdgeList& edges) {
    WeightedGraph g(n);
    for (const auto& [u, v, w] : edges) g.add_edge(u, v, w);
    return g;
}

// nlohmann -> Python through the json module; keeps nested payloads intact.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict solution_dict(const ForestSolution& s) {
    py::dict d;
    d["edges"] = s.edges;
    d["weight"] = s.weight;
    d["feasible"] = s.feasible;
    return d;
}

GenSpec spec_from_kwargs(const std::string& family, const py::kwargs& kw) {
    nlohmann::json j{{"family", family}};
    for (auto item : kw) {
        auto key = py::cast<std::string>(item.first);
        auto value = py::reinterpret_borrow<py::object>(item.second);
        if (py::isinstance<py::bool_>(value)) j[key] = value.cast<bool>();
        else if (py::isinstance<py::int_>(value)) j[key] = value.cast<long long>();
        else if (py::isinstance<py::float_>(value)) j[key] = value.cast<double>();
        else throw InvalidSpec("generator option '" + key + "' must be a number");
    }
    return gen_spec_from_json(j);
}

}  // namespace

PYBIND11_MODULE(_steiner, m) {
    m.doc() = "Steiner forest algorithms on a simulated CONGEST network";

    auto base = py::register_exception<SteinerError>(m, "SteinerError");
    py::register_exception<BudgetViolation>(m, "BudgetViolation", base.ptr());
    py::register_exception<RoundCapExceeded>(m, "RoundCapExceeded", base.ptr());
    py::register_exception<InvalidSpec>(m, "InvalidSpec", base.ptr());
    py::register_exception<InvalidEpsilon>(m, "InvalidEpsilon", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<Infeasible>(m, "Infeasible", base.ptr());
    py::register_exception<TooLarge>(m, "TooLarge", base.ptr());

    py::class_<SteinerInstance>(m, "Instance")
        .def_static(
            "ic",
            [](int n, const EdgeList& edges, std::vector<int> labels) {
                return SteinerInstance::ic(build_graph(n, edges), std::move(labels));
            },
            py::arg("n"), py::arg("edges"), py::arg("labels"))
        .def_static(
            "cr",
            [](int n, const EdgeList& edges, std::vector<std::vector<int>> requests) {
                return SteinerInstance::cr(build_graph(n, edges), std::move(requests));
            },
            py::arg("n"), py::arg("edges"), py::arg("requests"))
        .def_static(
            "parse",
            [](const std::string& text) {
                std::istringstream in(text);
                return read_instance(in);
            },
            py::arg("text"))
        .def("dump",
             [](const SteinerInstance& inst) {
                 std::ostringstream out;
                 write_instance(out, inst);
                 return out.str();
             })
        .def_property_readonly("n", &SteinerInstance::n)
        .def_property_readonly("m", [](const SteinerInstance& i) { return i.graph.m(); })
        .def_property_readonly("t", &SteinerInstance::t)
        .def_property_readonly("k", [](const SteinerInstance& i) { return static_cast<int>(i.components().size()); })
        .def_property_readonly("kind", [](const SteinerInstance& i) { return i.kind == InstanceKind::IC ? "IC" : "CR"; })
        .def_property_readonly("edges",
                               [](const SteinerInstance& i) {
                                   EdgeList out;
                                   for (const auto& e : i.graph.edges()) out.emplace_back(e.u, e.v, e.w);
                                   return out;
                               })
        .def_readonly("labels", &SteinerInstance::label)
        .def_readonly("requests", &SteinerInstance::requests)
        .def("__repr__", [](const SteinerInstance& i) {
            return "<Instance " + std::string(i.kind == InstanceKind::IC ? "IC" : "CR") + " n=" +
                   std::to_string(i.n()) + " m=" + std::to_string(i.graph.m()) + " t=" + std::to_string(i.t()) + ">";
        });

    m.def(
        "gen_instance",
        [](const std::string& family, std::uint64_t seed, const py::kwargs& kw) {
            return gen_instance(spec_from_kwargs(family, kw), seed);
        },
        py::arg("family"), py::arg("seed") = 1,
        "Instance of a generator family; other keywords set GenSpec fields (n, m, rows, cols, radius, wmin, wmax, "
        "k, per_component, heavy_middle).");
    m.def("gen_sd_gadget_cr", &gen_sd_gadget_cr, py::arg("n"), py::arg("A"), py::arg("B"), py::arg("rho"));
    m.def("gen_sd_gadget_ic", &gen_sd_gadget_ic, py::arg("n"), py::arg("A"), py::arg("B"));
    m.def("sd_gadget_heavy_edges", &sd_gadget_heavy_edges, py::arg("gadget"), py::arg("n"));

    m.def(
        "solve",
        [](const SteinerInstance& inst, const std::string& algo, const std::string& eps, std::uint64_t seed,
           int budget_words, long long round_cap) {
            SolveConfig sc;
            sc.algo = parse_algo(algo);
            sc.eps = parse_rational(eps);
            if (sc.eps <= 0) throw InvalidEpsilon("epsilon must be positive");
            sc.seed = seed;
            sc.sim.seed = seed;
            sc.sim.budget_words = budget_words;
            sc.sim.round_cap = round_cap;
            SolveOutcome out;
            {
                py::gil_scoped_release release;
                out = solve(inst, sc);
            }
            py::dict d = solution_dict(out.solution);
            d["stats"] = to_py(to_json(out.stats));
            d["merge_phases"] = out.merge_phases;
            d["growth_phases"] = out.growth_phases;
            d["dual"] = out.dual ? py::object(py::str(to_string(*out.dual))) : py::object(py::none());
            d["detail"] = out.detail.is_null() ? py::object(py::dict()) : to_py(out.detail);
            return d;
        },
        py::arg("instance"), py::arg("algo") = "central-exact", py::arg("eps") = "1/2", py::arg("seed") = 1,
        py::arg("budget_words") = kDefaultBudgetWords, py::arg("round_cap") = 0);

    m.def(
        "exact_optimum",
        [](const SteinerInstance& inst) {
            ForestSolution s;
            {
                py::gil_scoped_release release;
                s = exact_optimum(inst);
            }
            return solution_dict(s);
        },
        py::arg("instance"));
    m.def("oracle_admits", &oracle_admits, py::arg("instance"));
    m.def(
        "minimal_subforest",
        [](const SteinerInstance& inst, const std::vector<int>& edges) {
            return solution_dict(minimal_subforest(edges, inst));
        },
        py::arg("instance"), py::arg("edges"));
    m.def(
        "check_feasible", [](const SteinerInstance& inst, const std::vector<int>& edges) { return check_feasible(edges, inst); },
        py::arg("instance"), py::arg("edges"));

    m.def(
        "profile",
        [](const SteinerInstance& inst) {
            auto p = profile(inst);
            py::dict d;
            d["n"] = p.n;
            d["m"] = p.m;
            d["t"] = p.t;
            d["k"] = p.k;
            d["s"] = p.s;
            d["D"] = p.D;
            d["WD"] = p.WD;
            return d;
        },
        py::arg("instance"));

    m.def(
        "run_suite",
        [](const std::string& config_json) {
            auto cfg = experiment_from_json(nlohmann::json::parse(config_json));
            std::ostringstream out;
            {
                py::gil_scoped_release release;
                write_csv(out, run_suite(cfg), cfg.wall_time);
            }
            return out.str();
        },
        py::arg("config_json"), "Runs an experiment config (JSON text) and returns the CSV rows.");

    m.attr("ALGORITHMS") = std::vector<std::string>{"central-exact", "central-eps", "dist", "sublinear", "randomized"};
}
