#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smc/model.hpp"
#include "smc/pipeline.hpp"
#include "smc/stats.hpp"
#include "smc/transform.hpp"

#include <utility>

namespace py = pybind11;

namespace {

smc::stats::CiMethod method_of(const std::string& name) {
    return smc::stats::method_from_name(name);
}

std::pair<double, double> ci(const std::string& method, std::int64_t n, std::int64_t k,
                             double delta) {
    const auto c = smc::stats::confidence_interval(method_of(method), {n, k}, delta);
    return {c.lo, c.hi};
}

double exact_value(const std::string& model_json) {
    const auto m = smc::model::parse_model(model_json);
    return smc::model::exact_reachability_value(m)[static_cast<std::size_t>(m.initial)];
}

std::string transform_report(const std::string& model_json, bool equivalence,
                             bool chains, bool scc_fragments) {
    const auto m = smc::model::parse_model(model_json);
    const auto cm = smc::transform::build_class_model(
        smc::model::support_view(m), {equivalence, scc_fragments, chains, 1 << 20});
    std::string out = "transitions=" + std::to_string(cm.live_transition_count());
    for (const auto& line : cm.report) out += "\n" + line;
    return out;
}

std::string run(const std::string& model_json, double epsilon, double delta,
                const std::string& method, const std::string& budget,
                bool small_support, bool equivalence, bool chains, bool scc_fragments,
                std::int64_t batch_size, std::int64_t max_batches,
                std::int64_t fixed_paths, std::uint64_t seed, const std::string& mode,
                double p_min, std::int64_t step_cap) {
    const auto m = smc::model::parse_model(model_json);
    smc::pipeline::RunConfig cfg;
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    cfg.method = method_of(method);
    cfg.budget_mode = budget == "uniform" ? smc::budget::AllocationMode::Uniform
                                          : smc::budget::AllocationMode::Independence;
    cfg.small_support = small_support;
    cfg.equivalence = equivalence;
    cfg.chains = chains;
    cfg.scc_fragments = scc_fragments;
    cfg.batch_size = batch_size;
    cfg.max_batches = max_batches;
    cfg.fixed_paths = fixed_paths;
    cfg.seed = seed;
    cfg.mode = mode == "black" ? smc::sampler::Mode::Black : smc::sampler::Mode::Grey;
    cfg.p_min = p_min;
    cfg.step_cap = step_cap;
    const auto r = smc::pipeline::run_smc(m, cfg);
    return smc::pipeline::result_to_json(cfg, r);
}

}  // namespace

PYBIND11_MODULE(_smcmdp, mod) {
    mod.doc() = "statistical model checking of MDPs with unknown transition probabilities";

    mod.def("ci", &ci, py::arg("method"), py::arg("n"), py::arg("k"), py::arg("delta"),
            "two-sided confidence interval (lo, hi) on a transition probability");
    mod.def("hoeffding_halfwidth", &smc::stats::hoeffding_halfwidth, py::arg("n"),
            py::arg("delta"));
    mod.def(
        "worst_case_n",
        [](const std::string& method, double delta, double eps) {
            return smc::stats::worst_case_n(method_of(method), delta, eps);
        },
        py::arg("method"), py::arg("delta"), py::arg("epsilon"),
        "smallest n whose worst-case interval width is at most epsilon");
    mod.def(
        "min_coverage",
        [](const std::string& method, std::int64_t n, double delta, int points) {
            return smc::stats::min_coverage(method_of(method), n, delta, points);
        },
        py::arg("method"), py::arg("n"), py::arg("delta"), py::arg("points") = 1001,
        "minimum exact coverage probability over a p grid");
    mod.def("exact_value", &exact_value, py::arg("model_json"),
            "exact max reachability value at the initial state");
    mod.def("transform_report", &transform_report, py::arg("model_json"),
            py::arg("equivalence") = true, py::arg("chains") = true,
            py::arg("scc_fragments") = true,
            "applied structural transforms and remaining learnable transitions");
    mod.def("run", &run, py::arg("model_json"), py::arg("epsilon") = 0.01,
            py::arg("delta") = 0.05, py::arg("method") = "clopper-pearson",
            py::arg("budget") = "independence", py::arg("small_support") = true,
            py::arg("equivalence") = true, py::arg("chains") = true,
            py::arg("scc_fragments") = true, py::arg("batch_size") = 1000,
            py::arg("max_batches") = 1000, py::arg("fixed_paths") = 0,
            py::arg("seed") = 0, py::arg("mode") = "grey", py::arg("p_min") = 0.0,
            py::arg("step_cap") = 1000000,
            "sample-estimate-solve run; returns the result JSON document");
}
