#ifndef SMC_PIPELINE_HPP
#define SMC_PIPELINE_HPP

#include "smc/budget.hpp"
#include "smc/model.hpp"
#include "smc/sampler.hpp"
#include "smc/solver.hpp"
#include "smc/stats.hpp"
#include "smc/transform.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace smc::pipeline {

struct RunConfig {
    std::string model_path;  // informational; the Mdp is passed separately
    double epsilon = 0.01;
    double delta = 0.05;
    stats::CiMethod method = stats::CiMethod::ClopperPearson;
    budget::AllocationMode budget_mode = budget::AllocationMode::Independence;
    bool small_support = true;
    bool equivalence = true;
    bool chains = true;
    bool scc_fragments = true;
    std::int64_t batch_size = 1000;
    std::int64_t max_batches = 1000;
    std::int64_t fixed_paths = 0;  // > 0: sample exactly this many paths, solve once
    std::uint64_t seed = 0;
    sampler::Mode mode = sampler::Mode::Grey;
    double p_min = 0.0;  // black mode only
    std::int64_t step_cap = 1'000'000;
    bool timing = false;  // include wall time in the result (breaks byte determinism)

    void validate() const;  // throws std::invalid_argument
};

struct RunResult {
    double v_lo = 0.0;
    double v_hi = 1.0;
    std::int64_t paths = 0;         // completed root-to-absorption runs
    std::int64_t capped_paths = 0;  // aborted at the step cap
    std::int64_t batches = 0;
    std::size_t transitions = 0;    // learnable transitions of the transformed model
    std::vector<std::string> report;
    bool converged = false;
    int exit_code = 0;  // 0 converged, 2 path budget exhausted
    double wall_time_s = 0.0;
    std::string note;  // adaptive-stopping caveat, when applicable
};

/// The sample-estimate-solve loop: transform the support view, allocate the
/// confidence budget, then sample in batches, rebuild the interval MDP and
/// run interval iteration (kappa = epsilon/10) until the bound gap at the
/// initial state is at most epsilon or the budget runs out.
RunResult run_smc(const model::Mdp& m, const RunConfig& cfg);

/// Estimate the interval MDP over transformed classes from the counts:
/// per-successor confidence intervals at the planned per-transition budgets,
/// [0,1] for unvisited tasks, exact mirroring for two-successor complements,
/// [1,1] for single-successor distributions under small support.
solver::IntervalMdp estimate_interval_mdp(const transform::ClassModel& cm,
                                          const budget::TaskSet& tasks,
                                          const budget::BudgetPlan& plan,
                                          const sampler::CountsTable& counts,
                                          stats::CiMethod method,
                                          const std::vector<bool>& open_dist = {});

/// Deterministic result document (wall time only included when cfg.timing).
std::string result_to_json(const RunConfig& cfg, const RunResult& r);

struct NamedModel {
    std::string name;
    model::Mdp mdp;
    double epsilon;  // model-specific target precision
};

struct AblationRow {
    std::string axis;
    std::vector<std::string> model_names;
    std::vector<double> ratios;  // per model: paths(full minus axis) / paths(full)
    double min = 0.0, geomean = 0.0, max = 0.0;
};

/// For each axis, compare the full configuration against full-minus-one over
/// `seeds` seeds per model; path counts are summed over seeds before taking
/// the ratio.
std::vector<AblationRow> run_ablation(const std::vector<NamedModel>& models,
                                      const RunConfig& base,
                                      const std::vector<std::string>& axes, int seeds);

std::string ablation_to_json(const std::vector<AblationRow>& rows);

struct CoverageReport {
    int trials = 0;
    int contained = 0;
    double fraction = 0.0;
    double exact_value = 0.0;
};

/// `trials` independent runs at a fixed path budget (cfg.fixed_paths); counts
/// how often the exact value lies inside the returned bounds.
CoverageReport coverage_experiment(const model::Mdp& m, const RunConfig& cfg, int trials);

/// Writes ratio_eps.csv, ratio_phat.csv, ratio_grid.csv, coverage_wilson.csv
/// into `dir` (created by the caller).
void emit_figures(const std::string& dir);

}  // namespace smc::pipeline

#endif
