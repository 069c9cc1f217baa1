#ifndef SMC_SAMPLER_HPP
#define SMC_SAMPLER_HPP

#include "smc/model.hpp"
#include "smc/rng.hpp"
#include "smc/stats.hpp"
#include "smc/transform.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smc::sampler {

/// Sufficient statistics over transformed-model actions: n per action id,
/// k per (action id, successor class id). Merge is pure addition, so counts
/// from parallel samplers can be combined in any order.
struct CountsTable {
    std::vector<std::int64_t> n;
    std::vector<std::map<int, std::int64_t>> k;  // action -> successor class -> count
    std::int64_t paths = 0;                      // completed root-to-absorption paths
    std::int64_t capped_paths = 0;               // aborted at the step cap

    void resize(std::size_t num_actions);
    void add(int action_id, int succ_cls);
    void merge(const CountsTable& other);
    /// Per-action successor counts sum to n.
    bool consistent() const;
};

enum class Mode { Grey, Black };

struct SamplerConfig {
    std::uint64_t seed = 0;
    std::int64_t step_cap = 1'000'000;  // ground transitions per path
    Mode mode = Mode::Grey;
    double p_min = 0.0;                 // black mode: lower bound on positive probs
};

struct PathSummary {
    std::int64_t steps = 0;  // ground transitions taken (including internal ones)
    int final_class = -1;
    bool capped = false;
    bool reached_target = false;
};

/// Simulates the ground-truth MDP under the uniform scheduler over
/// transformed-model actions and records one observation per executed action:
/// the successor class it finally produced. Macro actions run their fragment
/// walk internally (one count per traversal); actions of a collapsed
/// end-component class navigate to the owning ground state, sample, and retry
/// while the outcome stays inside the component, so their counts estimate the
/// conditional leaving distribution.
class Sampler {
public:
    Sampler(const model::Mdp& m, const transform::ClassModel& cm, SamplerConfig cfg);

    /// Sample one path from the initial state until a terminal class or the
    /// step cap. Counts of completed action executions are retained either way;
    /// an execution in flight when the cap hits is discarded.
    PathSummary sample_path(CountsTable& counts);

    rng::Counter& rng() { return rng_; }

private:
    struct Outcome {
        int cls;
        int ground;
    };

    std::optional<Outcome> run_action(int action_id, int& ground, std::int64_t& steps);
    int sample_ground(int state, int ground_action, std::int64_t& steps);
    const std::vector<int>& nav_policy(int cls, int owner);

    const model::Mdp& m_;
    const transform::ClassModel& cm_;
    SamplerConfig cfg_;
    rng::Counter rng_;
    // (class, owner ground state) -> per member position: ground action moving
    // one support step closer to the owner (-1 at the owner itself).
    std::map<std::pair<int, int>, std::vector<int>> nav_;
};

/// Black-box support rule: the support of an action is declared complete once
/// the confidence lower bounds of its observed successors sum above 1 - p_min.
bool support_complete(const CountsTable& counts, int action_id, stats::CiMethod method,
                      double delta_t, double p_min);

/// Audit dump, header `state,action,successor,n,k`, rows ordered by action id
/// then successor class id. Only actions with samples appear.
std::string counts_to_csv(const transform::ClassModel& cm, const CountsTable& counts);

}  // namespace smc::sampler

#endif
