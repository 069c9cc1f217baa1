#ifndef SMC_TRANSFORM_HPP
#define SMC_TRANSFORM_HPP

#include "smc/graph.hpp"
#include "smc/model.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace smc::transform {

enum class ClassKind { Plain, Goal, Sink, Mec };

enum class ActionKind { Ground, Macro };

/// An action of the transformed model. Ground actions execute one ground
/// transition (with conditional retry semantics when owned by a MEC class);
/// macro actions execute their base action and then follow a frozen internal
/// strategy through a retired fragment until it exits.
struct ActionRec {
    int cls = -1;                 // owning class
    std::string name;
    ActionKind kind = ActionKind::Ground;
    int owner_state = -1;         // ground state owning the underlying action
    int ground_action = -1;       // index into Mdp::action_names[owner_state]
    int base_action = -1;         // macro only: replaced action id
    int fragment = -1;            // macro only
    int strategy = -1;            // macro only
    std::vector<int> succ;        // successor class ids, sorted unique
};

struct ClassInfo {
    ClassKind kind = ClassKind::Plain;
    std::string name;
    std::vector<int> ground_states;   // sorted member ground states
    std::vector<int> actions;         // action ids; frozen once retired
    bool terminal = false;            // target/goal/sink/absorbing: sampling stops
    bool is_target = false;           // value 1 semantics
    bool retired = false;
    int retired_into = -1;            // fragment id
};

struct FragmentRec {
    std::vector<int> members;                    // retired class ids, sorted
    std::vector<std::vector<int>> strategies;    // strategy -> action id per member
    std::vector<std::string> strategy_names;
};

struct TransformOptions {
    bool equivalence = true;      // value-class merge + MEC collapse
    bool scc_fragments = true;
    bool chains = true;
    std::int64_t strategy_cap = 1 << 20;  // max strategies per fragment
};

/// Support-level transformed model over persistent class ids. Classes are never
/// deleted; fragment members are retired with frozen action lists so sampled
/// ground paths can always be translated into transformed-model observations.
struct ClassModel {
    model::SupportMdp support;            // ground support (copy)
    std::vector<ClassInfo> classes;
    std::vector<ActionRec> actions;
    std::vector<int> class0;              // ground state -> class id after merge/collapse
    std::vector<FragmentRec> fragments;
    int initial_class = -1;
    int goal_class = -1;                  // -1 if absent
    int sink_class = -1;
    std::vector<std::string> report;      // applied transforms, in order

    std::vector<int> live_classes() const;
    /// Live classes reachable from the initial class.
    std::vector<bool> reachable_live() const;
    /// Count of transitions of live reachable non-terminal distributions.
    std::size_t live_transition_count() const;
    int member_position(int fragment, int cls) const;
};

/// Build the transformed support model by applying the enabled transforms in
/// order: value-class merge, MEC collapse, SCC fragments, chain elimination to
/// fixpoint.
ClassModel build_class_model(const model::SupportMdp& g, const TransformOptions& opt);

/// Cost of quotienting the live class set R: (quotient_cost, direct_cost).
/// quotient_cost counts macro transitions over all entering actions and
/// strategies (with unreachable exits pruned); direct_cost counts transitions
/// originating in R.
std::pair<std::int64_t, std::int64_t> fragment_cost(const ClassModel& cm,
                                                    const std::vector<int>& r);

/// True if the live class set R contains no end component.
bool fragment_ec_free(const ClassModel& cm, const std::vector<int>& r);

/// Support of the macro action (base, strategy) over a prospective fragment R
/// with per-member chosen action ids.
std::vector<int> macro_support(const ClassModel& cm, const std::vector<int>& r,
                               const std::vector<int>& chosen, int base_action);

/// Chain candidates: live classes with exactly one live incoming transition,
/// excluding initial/terminal classes and classes forming an end component.
std::vector<int> chain_candidates(const ClassModel& cm);

/// Exact distribution of a transformed action over successor class ids, given
/// ground-truth probabilities. Macro actions are resolved by solving the linear
/// absorption system of the fragment walk (tolerance ~1e-12).
std::vector<std::pair<int, double>> exact_action_distribution(const model::Mdp& m,
                                                              const ClassModel& cm,
                                                              int action_id);

/// Max reachability value of the exact transformed model at the initial class.
/// Oracle for value-preservation tests.
double exact_transformed_value(const model::Mdp& m, const ClassModel& cm,
                               double tol = 1e-10);

}  // namespace smc::transform

#endif
