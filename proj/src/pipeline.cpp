#include "smc/pipeline.hpp"

#include "smc/graph.hpp"
#include "smc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace smc::pipeline {

using nlohmann::ordered_json;

void RunConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon must be in (0,1]");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (max_batches < 1) throw std::invalid_argument("max batches must be >= 1");
    if (fixed_paths < 0) throw std::invalid_argument("fixed paths must be >= 0");
    if (step_cap < 1) throw std::invalid_argument("step cap must be >= 1");
    if (mode == sampler::Mode::Black && !(p_min > 0.0 && p_min <= 1.0))
        throw std::invalid_argument("p_min must be in (0,1] in black mode");
}

namespace {

budget::BudgetPlan make_plan(const budget::TaskSet& tasks, const RunConfig& cfg,
                             double delta) {
    return cfg.budget_mode == budget::AllocationMode::Uniform
               ? budget::uniform_allocation(tasks, delta)
               : budget::independence_allocation(tasks, delta);
}

struct SolveOutcome {
    double lo, hi;
};

SolveOutcome solve(const solver::IntervalMdp& im, double epsilon) {
    const auto vb = solver::interval_iteration(im, epsilon / 10.0);
    const auto s0 = static_cast<std::size_t>(im.initial);
    double lo = vb.lo[s0], hi = vb.hi[s0];
    if (hi < lo) hi = lo;  // numerical safety; theory keeps lo <= hi
    return {lo, hi};
}

}  // namespace

solver::IntervalMdp estimate_interval_mdp(const transform::ClassModel& cm,
                                          const budget::TaskSet& tasks,
                                          const budget::BudgetPlan& plan,
                                          const sampler::CountsTable& counts,
                                          stats::CiMethod method,
                                          const std::vector<bool>& open_dist) {
    const bool black = !open_dist.empty();
    solver::IntervalMdp im;
    im.initial = cm.initial_class;
    im.act.resize(cm.classes.size());
    im.is_target.resize(cm.classes.size());
    for (std::size_t c = 0; c < cm.classes.size(); ++c)
        im.is_target[c] = cm.classes[c].is_target;

    auto k_of = [&](int aid, int succ) -> std::int64_t {
        const auto a = static_cast<std::size_t>(aid);
        if (a >= counts.k.size()) return 0;
        const auto it = counts.k[a].find(succ);
        return it == counts.k[a].end() ? 0 : it->second;
    };

    for (std::size_t i = 0; i < tasks.dists.size(); ++i) {
        const auto& dt = tasks.dists[i];
        const auto aid = static_cast<std::size_t>(dt.action_id);
        const std::int64_t n = aid < counts.n.size() ? counts.n[aid] : 0;
        solver::IntervalDist d;

        if (black) {
            // Support under discovery: only observed successors are listed;
            // an open flag stands in for everything not yet seen.
            d.open = open_dist[i];
            if (aid < counts.k.size()) {
                for (const auto& [succ, k] : counts.k[aid]) {
                    const auto ci = stats::confidence_interval(
                        method, {n, k}, plan.delta_t[i], /*allow_empty=*/true);
                    d.succ.push_back(succ);
                    d.lo.push_back(ci.lo);
                    d.hi.push_back(ci.hi);
                }
            }
        } else if (dt.direct_count == 0 && dt.succ.size() == 1) {
            // small support: single successor is certain
            d.succ = dt.succ;
            d.lo = {1.0};
            d.hi = {1.0};
        } else if (dt.complement) {
            // small support: estimate the designated successor, mirror the other
            const auto ci = stats::confidence_interval(
                method, {n, k_of(dt.action_id, dt.succ[0])}, plan.delta_t[i],
                /*allow_empty=*/true);
            d.succ = dt.succ;
            d.lo = {ci.lo, 1.0 - ci.hi};
            d.hi = {ci.hi, 1.0 - ci.lo};
        } else {
            for (int w : dt.succ) {
                const auto ci = stats::confidence_interval(
                    method, {n, k_of(dt.action_id, w)}, plan.delta_t[i],
                    /*allow_empty=*/true);
                d.succ.push_back(w);
                d.lo.push_back(ci.lo);
                d.hi.push_back(ci.hi);
            }
        }
        im.act[static_cast<std::size_t>(dt.cls)].push_back(std::move(d));
    }
    return im;
}

namespace {

RunResult run_grey(const model::Mdp& m, const RunConfig& cfg) {
    RunResult r;
    const auto cm = transform::build_class_model(
        model::support_view(m),
        {cfg.equivalence, cfg.scc_fragments, cfg.chains, 1 << 20});
    r.report = cm.report;
    r.transitions = cm.live_transition_count();

    const auto tasks = budget::enumerate_tasks(cm, cfg.small_support);
    const auto plan = make_plan(tasks, cfg, cfg.delta);

    sampler::SamplerConfig scfg;
    scfg.seed = cfg.seed;
    scfg.step_cap = cfg.step_cap;
    sampler::Sampler smp(m, cm, scfg);
    sampler::CountsTable counts;
    counts.resize(cm.actions.size());

    auto finish = [&](double lo, double hi) {
        r.v_lo = lo;
        r.v_hi = hi;
        r.paths = counts.paths;
        r.capped_paths = counts.capped_paths;
        r.converged = hi - lo <= cfg.epsilon + 1e-12;
        r.exit_code = r.converged ? 0 : 2;
    };

    if (cfg.fixed_paths > 0) {
        for (std::int64_t i = 0; i < cfg.fixed_paths; ++i) smp.sample_path(counts);
        r.batches = 1;
        const auto im = estimate_interval_mdp(cm, tasks, plan, counts, cfg.method);
        const auto [lo, hi] = solve(im, cfg.epsilon);
        finish(lo, hi);
        return r;
    }

    // structural short-circuit: solve before sampling anything
    {
        const auto im = estimate_interval_mdp(cm, tasks, plan, counts, cfg.method);
        const auto [lo, hi] = solve(im, cfg.epsilon);
        if (hi - lo <= cfg.epsilon + 1e-12) {
            finish(lo, hi);
            return r;
        }
    }
    double lo = 0.0, hi = 1.0;
    for (std::int64_t b = 0; b < cfg.max_batches; ++b) {
        for (std::int64_t i = 0; i < cfg.batch_size; ++i) smp.sample_path(counts);
        ++r.batches;
        const auto im = estimate_interval_mdp(cm, tasks, plan, counts, cfg.method);
        const auto out = solve(im, cfg.epsilon);
        lo = out.lo;
        hi = out.hi;
        if (hi - lo <= cfg.epsilon + 1e-12) break;
    }
    r.note = "adaptive stopping: interval methods are sized for a fixed n, "
             "re-estimation after each batch peeks repeatedly; use fixed-paths "
             "for single-look semantics";
    finish(lo, hi);
    return r;
}

// Two-phase black-box run: first learn the supports with a conservative
// uniform budget, then rebuild the transforms on the declared supports and
// estimate afresh. The confidence budget is split evenly across the phases.
RunResult run_black(const model::Mdp& m, const RunConfig& cfg) {
    RunResult r;
    const double d1 = cfg.delta / 2.0, d2 = cfg.delta / 2.0;

    // Phase 1: no structural knowledge; every state is a possible successor.
    auto blind = model::support_view(m);
    std::vector<int> all(static_cast<std::size_t>(blind.num_states()));
    for (int s = 0; s < blind.num_states(); ++s) all[static_cast<std::size_t>(s)] = s;
    for (auto& per_state : blind.succ)
        for (auto& succ : per_state) succ = all;
    const auto cm1 = transform::build_class_model(blind, {false, false, false, 1 << 20});

    // Worst-case number of transition tasks: each action has at most
    // floor(1/p_min) successors with probability >= p_min.
    std::int64_t pmax = 0;
    for (int s = 0; s < m.num_states(); ++s)
        pmax += static_cast<std::int64_t>(m.action_names[static_cast<std::size_t>(s)].size()) *
                static_cast<std::int64_t>(std::floor(1.0 / cfg.p_min));
    auto tasks1 = budget::enumerate_tasks(cm1, false);
    budget::BudgetPlan plan1;
    plan1.delta = d1;
    plan1.delta_d.resize(tasks1.dists.size(), 0.0);
    plan1.delta_t.resize(tasks1.dists.size(),
                         d1 / static_cast<double>(std::max<std::int64_t>(pmax, 1)));

    sampler::SamplerConfig scfg;
    scfg.seed = cfg.seed;
    scfg.step_cap = cfg.step_cap;
    scfg.mode = sampler::Mode::Black;
    scfg.p_min = cfg.p_min;
    sampler::Sampler smp1(m, cm1, scfg);
    sampler::CountsTable counts1;
    counts1.resize(cm1.actions.size());

    auto complete = [&](int aid) {
        return sampler::support_complete(counts1, aid, cfg.method,
                                         plan1.delta_t.empty() ? d1 : plan1.delta_t[0],
                                         cfg.p_min);
    };
    // Ready for phase 2 once every action of every state reachable in the
    // observed support graph has a certified support.
    auto phase1_done = [&]() {
        const int n = m.num_states();
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        std::vector<int> stack{m.initial};
        seen[static_cast<std::size_t>(m.initial)] = true;
        while (!stack.empty()) {
            const int s = stack.back();
            stack.pop_back();
            if (m.is_target[static_cast<std::size_t>(s)] || m.absorbing(s)) continue;
            const int c = cm1.class0[static_cast<std::size_t>(s)];
            for (int aid : cm1.classes[static_cast<std::size_t>(c)].actions) {
                if (!complete(aid)) return false;
                for (const auto& [wc, k] : counts1.k[static_cast<std::size_t>(aid)]) {
                    const int w = cm1.classes[static_cast<std::size_t>(wc)].ground_states[0];
                    if (!seen[static_cast<std::size_t>(w)]) {
                        seen[static_cast<std::size_t>(w)] = true;
                        stack.push_back(w);
                    }
                }
            }
        }
        return true;
    };

    std::int64_t batches_left = cfg.max_batches;
    bool ready = phase1_done();
    while (!ready && batches_left > 0) {
        for (std::int64_t i = 0; i < cfg.batch_size; ++i) smp1.sample_path(counts1);
        --batches_left;
        ++r.batches;
        ready = phase1_done();
    }
    r.paths = counts1.paths;
    r.capped_paths = counts1.capped_paths;

    if (!ready) {
        // supports never certified: report phase-1 bounds with open intervals
        std::vector<bool> open(tasks1.dists.size(), false);
        for (std::size_t i = 0; i < tasks1.dists.size(); ++i)
            open[i] = !complete(tasks1.dists[i].action_id);
        const auto im =
            estimate_interval_mdp(cm1, tasks1, plan1, counts1, cfg.method, open);
        const auto [lo, hi] = solve(im, cfg.epsilon);
        r.v_lo = lo;
        r.v_hi = hi;
        r.converged = hi - lo <= cfg.epsilon + 1e-12;
        r.exit_code = r.converged ? 0 : 2;
        r.note = "black mode: support certification incomplete";
        return r;
    }

    // Phase 2: declared supports; unexplored state-action pairs (unreachable
    // in the observed graph) become self-loops so the support view is total.
    auto obs = model::support_view(m);
    for (int s = 0; s < m.num_states(); ++s) {
        const int c = cm1.class0[static_cast<std::size_t>(s)];
        const auto& acts = cm1.classes[static_cast<std::size_t>(c)].actions;
        for (auto& succ : obs.succ[static_cast<std::size_t>(s)]) succ = {s};
        for (int aid : acts) {
            const auto& ar = cm1.actions[static_cast<std::size_t>(aid)];
            std::vector<int> ss;
            for (const auto& [wc, k] : counts1.k[static_cast<std::size_t>(aid)])
                ss.push_back(cm1.classes[static_cast<std::size_t>(wc)].ground_states[0]);
            std::sort(ss.begin(), ss.end());
            if (!ss.empty())
                obs.succ[static_cast<std::size_t>(s)][static_cast<std::size_t>(
                    ar.ground_action)] = std::move(ss);
        }
    }
    const auto cm2 = transform::build_class_model(
        obs, {cfg.equivalence, cfg.scc_fragments, cfg.chains, 1 << 20});
    r.report = cm2.report;
    r.transitions = cm2.live_transition_count();
    const auto tasks2 = budget::enumerate_tasks(cm2, cfg.small_support);
    const auto plan2 = make_plan(tasks2, cfg, d2);

    sampler::SamplerConfig scfg2 = scfg;
    scfg2.seed = rng::mix(cfg.seed, 1);
    sampler::Sampler smp2(m, cm2, scfg2);
    sampler::CountsTable counts2;
    counts2.resize(cm2.actions.size());

    double lo = 0.0, hi = 1.0;
    while (batches_left > 0) {
        for (std::int64_t i = 0; i < cfg.batch_size; ++i) smp2.sample_path(counts2);
        --batches_left;
        ++r.batches;
        const auto im = estimate_interval_mdp(cm2, tasks2, plan2, counts2, cfg.method);
        const auto out = solve(im, cfg.epsilon);
        lo = out.lo;
        hi = out.hi;
        if (hi - lo <= cfg.epsilon + 1e-12) break;
    }
    r.paths += counts2.paths;
    r.capped_paths += counts2.capped_paths;
    r.v_lo = lo;
    r.v_hi = hi;
    r.converged = hi - lo <= cfg.epsilon + 1e-12;
    r.exit_code = r.converged ? 0 : 2;
    r.note = "black mode: confidence budget split evenly between support "
             "certification and estimation";
    return r;
}

}  // namespace

RunResult run_smc(const model::Mdp& m, const RunConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    RunResult r = cfg.mode == sampler::Mode::Black ? run_black(m, cfg) : run_grey(m, cfg);
    r.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string result_to_json(const RunConfig& cfg, const RunResult& r) {
    ordered_json doc;
    ordered_json c;
    c["model"] = cfg.model_path;
    c["epsilon"] = cfg.epsilon;
    c["delta"] = cfg.delta;
    c["method"] = stats::method_name(cfg.method);
    c["budget"] =
        cfg.budget_mode == budget::AllocationMode::Uniform ? "uniform" : "independence";
    c["small_support"] = cfg.small_support;
    c["equivalence"] = cfg.equivalence;
    c["chains"] = cfg.chains;
    c["scc_fragments"] = cfg.scc_fragments;
    c["batch_size"] = cfg.batch_size;
    c["max_batches"] = cfg.max_batches;
    c["fixed_paths"] = cfg.fixed_paths;
    c["seed"] = cfg.seed;
    c["mode"] = cfg.mode == sampler::Mode::Black ? "black" : "grey";
    if (cfg.mode == sampler::Mode::Black) c["p_min"] = cfg.p_min;
    c["step_cap"] = cfg.step_cap;
    doc["config"] = std::move(c);
    doc["bounds"] = {{"lo", r.v_lo}, {"hi", r.v_hi}};
    doc["converged"] = r.converged;
    doc["exit_code"] = r.exit_code;
    doc["paths"] = r.paths;
    doc["capped_paths"] = r.capped_paths;
    doc["batches"] = r.batches;
    doc["transitions"] = r.transitions;
    doc["transform_report"] = r.report;
    if (!r.note.empty()) doc["note"] = r.note;
    if (cfg.timing) doc["wall_time_s"] = r.wall_time_s;
    return doc.dump(2) + "\n";
}

std::vector<AblationRow> run_ablation(const std::vector<NamedModel>& models,
                                      const RunConfig& base,
                                      const std::vector<std::string>& axes, int seeds) {
    auto removed = [&](const std::string& axis) {
        RunConfig c = base;
        if (axis == "cp")
            c.method = stats::CiMethod::Hoeffding;
        else if (axis == "small-support")
            c.small_support = false;
        else if (axis == "independence")
            c.budget_mode = budget::AllocationMode::Uniform;
        else if (axis == "equivalence")
            c.equivalence = false;
        else if (axis == "chains")
            c.chains = false;
        else if (axis == "scc-fragments")
            c.scc_fragments = false;
        else
            throw std::invalid_argument("unknown ablation axis: " + axis);
        return c;
    };

    auto total_paths = [&](const NamedModel& nm, RunConfig c) {
        c.epsilon = nm.epsilon;
        std::int64_t total = 0;
        for (int t = 0; t < seeds; ++t) {
            c.seed = rng::mix(base.seed, static_cast<std::uint64_t>(t));
            total += run_smc(nm.mdp, c).paths;
        }
        return total;
    };

    std::vector<AblationRow> rows;
    for (const auto& axis : axes) {
        AblationRow row;
        row.axis = axis;
        double log_sum = 0.0;
        for (const auto& nm : models) {
            const auto full = std::max<std::int64_t>(total_paths(nm, base), 1);
            const auto cut = std::max<std::int64_t>(total_paths(nm, removed(axis)), 1);
            const double ratio = static_cast<double>(cut) / static_cast<double>(full);
            row.model_names.push_back(nm.name);
            row.ratios.push_back(ratio);
            log_sum += std::log(ratio);
        }
        row.min = *std::min_element(row.ratios.begin(), row.ratios.end());
        row.max = *std::max_element(row.ratios.begin(), row.ratios.end());
        row.geomean = std::exp(log_sum / static_cast<double>(row.ratios.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string ablation_to_json(const std::vector<AblationRow>& rows) {
    ordered_json doc = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json e;
        e["axis"] = row.axis;
        ordered_json per;
        for (std::size_t i = 0; i < row.ratios.size(); ++i)
            per[row.model_names[i]] = row.ratios[i];
        e["ratios"] = std::move(per);
        e["min"] = row.min;
        e["geomean"] = row.geomean;
        e["max"] = row.max;
        doc.push_back(std::move(e));
    }
    return doc.dump(2) + "\n";
}

CoverageReport coverage_experiment(const model::Mdp& m, const RunConfig& cfg, int trials) {
    if (cfg.fixed_paths <= 0)
        throw std::invalid_argument("coverage experiment needs a fixed path budget");
    CoverageReport rep;
    rep.trials = trials;
    rep.exact_value =
        model::exact_reachability_value(m)[static_cast<std::size_t>(m.initial)];
    for (int t = 0; t < trials; ++t) {
        RunConfig c = cfg;
        c.seed = rng::mix(cfg.seed, static_cast<std::uint64_t>(t));
        const auto r = run_smc(m, c);
        if (r.v_lo - 1e-9 <= rep.exact_value && rep.exact_value <= r.v_hi + 1e-9)
            ++rep.contained;
    }
    rep.fraction = static_cast<double>(rep.contained) / static_cast<double>(trials);
    return rep;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace

void emit_figures(const std::string& dir) {
    const std::vector<double> axis{0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5};
    write_file(dir + "/ratio_grid.csv",
               stats::ratio_grid_csv(stats::ratio_grid(axis, axis)));
    write_file(dir + "/ratio_eps.csv",
               stats::ratio_grid_csv(stats::ratio_grid(
                   {0.01}, {0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5})));

    std::ostringstream phat;
    phat << "phat,n_hoeffding,n_cp,ratio\n" << std::setprecision(12);
    for (int i = 1; i <= 99; ++i) {
        const double p = static_cast<double>(i) / 100.0;
        const auto nh =
            stats::required_n_at_phat(stats::CiMethod::Hoeffding, 0.01, 0.01, p);
        const auto nc =
            stats::required_n_at_phat(stats::CiMethod::ClopperPearson, 0.01, 0.01, p);
        phat << p << ',' << nh << ',' << nc << ','
             << static_cast<double>(nh) / static_cast<double>(nc) << '\n';
    }
    write_file(dir + "/ratio_phat.csv", phat.str());

    std::ostringstream cov;
    cov << "n,delta,p,coverage\n" << std::setprecision(12);
    std::vector<double> ps(1001);
    for (int i = 0; i <= 1000; ++i) ps[static_cast<std::size_t>(i)] = i / 1000.0;
    for (const double delta : {0.1, 0.01}) {
        const auto curve = stats::coverage_curve(stats::CiMethod::WilsonCC, 100, delta, ps);
        for (std::size_t i = 0; i < ps.size(); ++i)
            cov << 100 << ',' << delta << ',' << ps[i] << ',' << curve[i] << '\n';
    }
    write_file(dir + "/coverage_wilson.csv", cov.str());
}

}  // namespace smc::pipeline
