#include "smc/model.hpp"
#include "smc/pipeline.hpp"
#include "smc/stats.hpp"
#include "smc/transform.hpp"

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::ordered_json;

smc::model::Mdp load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return smc::model::parse_model(ss.str());
}

void emit(const std::string& output, const std::string& text) {
    if (output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(output, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + output);
        out << text;
    }
}

struct CommonOpts {
    smc::pipeline::RunConfig cfg;
    std::string method = "clopper-pearson";
    std::string budget = "independence";
    std::string mode = "grey";
    std::string output;

    void add_to(CLI::App& app, bool with_model = true) {
        if (with_model)
            app.add_option("--model", cfg.model_path, "model JSON file")->required();
        app.add_option("--epsilon", cfg.epsilon, "target precision (0,1]");
        app.add_option("--delta", cfg.delta, "confidence budget (0,1)");
        app.add_option("--method", method,
                       "CI method: hoeffding | clopper-pearson | wilson-cc | scenario");
        app.add_option("--budget", budget, "allocation: uniform | independence");
        app.add_flag("--small-support,!--no-small-support", cfg.small_support,
                     "two-successor / singleton budget savings");
        app.add_flag("--equivalence,!--no-equivalence", cfg.equivalence,
                     "value-class merging and end-component collapsing");
        app.add_flag("--chains,!--no-chains", cfg.chains, "chain fragment elimination");
        app.add_flag("--scc-fragments,!--no-scc-fragments", cfg.scc_fragments,
                     "SCC fragment quotients");
        app.add_option("--batch-size", cfg.batch_size, "paths per batch");
        app.add_option("--max-batches", cfg.max_batches, "batch budget");
        app.add_option("--fixed-paths", cfg.fixed_paths,
                       "sample exactly this many paths, then solve once");
        app.add_option("--seed", cfg.seed, "64-bit RNG seed");
        app.add_option("--mode", mode, "grey | black");
        app.add_option("--p-min", cfg.p_min, "black mode: minimum positive probability");
        app.add_option("--step-cap", cfg.step_cap, "ground steps per path");
        app.add_flag("--timing", cfg.timing, "include wall time in the result JSON");
        app.add_option("--output", output, "write the result here instead of stdout");
    }

    void resolve() {
        cfg.method = smc::stats::method_from_name(method);
        if (budget == "uniform")
            cfg.budget_mode = smc::budget::AllocationMode::Uniform;
        else if (budget == "independence")
            cfg.budget_mode = smc::budget::AllocationMode::Independence;
        else
            throw std::invalid_argument("unknown budget allocation: " + budget);
        if (mode == "grey")
            cfg.mode = smc::sampler::Mode::Grey;
        else if (mode == "black")
            cfg.mode = smc::sampler::Mode::Black;
        else
            throw std::invalid_argument("unknown mode: " + mode);
    }
};

int cmd_run(CommonOpts& o) {
    o.resolve();
    const auto m = load_model(o.cfg.model_path);
    const auto r = smc::pipeline::run_smc(m, o.cfg);
    emit(o.output, smc::pipeline::result_to_json(o.cfg, r));
    return r.exit_code;
}

int cmd_solve(const std::string& path, const std::string& output) {
    const auto m = load_model(path);
    const auto v = smc::model::exact_reachability_value(m);
    ordered_json doc;
    doc["model"] = path;
    doc["value"] = v[static_cast<std::size_t>(m.initial)];
    ordered_json per;
    for (std::size_t s = 0; s < m.states.size(); ++s) per[m.states[s]] = v[s];
    doc["values"] = std::move(per);
    emit(output, doc.dump(2) + "\n");
    return 0;
}

int cmd_transform(CommonOpts& o) {
    o.resolve();
    const auto m = load_model(o.cfg.model_path);
    const auto cm = smc::transform::build_class_model(
        smc::model::support_view(m),
        {o.cfg.equivalence, o.cfg.scc_fragments, o.cfg.chains, 1 << 20});
    ordered_json doc;
    doc["model"] = o.cfg.model_path;
    doc["report"] = cm.report;
    doc["transitions"] = cm.live_transition_count();
    ordered_json classes = ordered_json::array();
    for (int c : cm.live_classes()) {
        const auto& ci = cm.classes[static_cast<std::size_t>(c)];
        ordered_json e;
        e["name"] = ci.name;
        ordered_json acts = ordered_json::array();
        for (int aid : ci.actions)
            acts.push_back(cm.actions[static_cast<std::size_t>(aid)].name);
        e["actions"] = std::move(acts);
        classes.push_back(std::move(e));
    }
    doc["classes"] = std::move(classes);
    emit(o.output, doc.dump(2) + "\n");
    return 0;
}

int cmd_ablate(CommonOpts& o, const std::vector<std::string>& model_paths,
               std::vector<std::string> axes, int seeds) {
    o.resolve();
    if (axes.empty())
        axes = {"cp", "small-support", "independence", "equivalence", "chains",
                "scc-fragments"};
    std::vector<smc::pipeline::NamedModel> models;
    for (const auto& p : model_paths)
        models.push_back({p, load_model(p), o.cfg.epsilon});
    const auto rows = smc::pipeline::run_ablation(models, o.cfg, axes, seeds);
    emit(o.output, smc::pipeline::ablation_to_json(rows));
    return 0;
}

int cmd_coverage(CommonOpts& o, int trials) {
    o.resolve();
    if (o.cfg.fixed_paths <= 0) o.cfg.fixed_paths = 1000;
    const auto m = load_model(o.cfg.model_path);
    const auto rep = smc::pipeline::coverage_experiment(m, o.cfg, trials);
    ordered_json doc;
    doc["model"] = o.cfg.model_path;
    doc["method"] = smc::stats::method_name(o.cfg.method);
    doc["delta"] = o.cfg.delta;
    doc["fixed_paths"] = o.cfg.fixed_paths;
    doc["trials"] = rep.trials;
    doc["contained"] = rep.contained;
    doc["fraction"] = rep.fraction;
    doc["exact_value"] = rep.exact_value;
    emit(o.output, doc.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"statistical model checking of MDPs with unknown probabilities"};
    app.require_subcommand(1);

    CommonOpts run_o, abl_o, cov_o, tr_o;
    std::string solve_model, solve_out, fig_dir = ".";
    std::vector<std::string> abl_models, abl_axes;
    int abl_seeds = 10, cov_trials = 200;

    auto* run = app.add_subcommand("run", "one sample-estimate-solve run");
    run_o.add_to(*run);

    auto* ablate = app.add_subcommand("ablate", "full vs full-minus-one comparisons");
    abl_o.add_to(*ablate, false);
    ablate->add_option("--model", abl_models, "model JSON file(s)")->required();
    ablate->add_option("--axes", abl_axes,
                       "axes to remove (default: all improvements)");
    ablate->add_option("--seeds", abl_seeds, "seeds per cell");

    auto* coverage = app.add_subcommand("coverage", "empirical PAC coverage");
    cov_o.add_to(*coverage);
    coverage->add_option("--trials", cov_trials, "independent runs");

    auto* figures = app.add_subcommand("figures", "emit figure CSV data");
    figures->add_option("--out-dir", fig_dir, "output directory");

    auto* solve = app.add_subcommand("solve", "exact reachability value (oracle)");
    solve->add_option("--model", solve_model, "model JSON file")->required();
    solve->add_option("--output", solve_out, "write the result here");

    auto* transform = app.add_subcommand("transform", "print the transform report");
    tr_o.add_to(*transform);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_o);
        if (ablate->parsed()) return cmd_ablate(abl_o, abl_models, abl_axes, abl_seeds);
        if (coverage->parsed()) return cmd_coverage(cov_o, cov_trials);
        if (figures->parsed()) {
            smc::pipeline::emit_figures(fig_dir);
            return 0;
        }
        if (solve->parsed()) return cmd_solve(solve_model, solve_out);
        if (transform->parsed()) return cmd_transform(tr_o);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const smc::model::ModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
