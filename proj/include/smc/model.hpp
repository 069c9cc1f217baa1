#ifndef SMC_MODEL_HPP
#define SMC_MODEL_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace smc::model {

/// Raised for syntax or validation problems in model documents.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ground-truth MDP. States without an entry in the document's `actions` object
/// are implicitly absorbing and carry an empty action list here.
struct Mdp {
    std::vector<std::string> states;                       // document order
    std::unordered_map<std::string, int> index;            // name -> id
    int initial = 0;
    std::vector<bool> is_target;                           // per state
    std::vector<std::vector<std::string>> action_names;    // per state; empty = absorbing
    // dist[s][a] = ordered (successor id, probability), document order.
    std::vector<std::vector<std::vector<std::pair<int, double>>>> dist;

    int num_states() const { return static_cast<int>(states.size()); }
    bool absorbing(int s) const { return action_names[static_cast<std::size_t>(s)].empty(); }
    /// Count of explicitly listed transitions (absorbing self-loops excluded).
    std::size_t num_transitions() const;
    std::vector<int> target_ids() const;
};

/// Grey-box view: topology only, probabilities erased.
struct SupportMdp {
    std::vector<std::string> states;
    int initial = 0;
    std::vector<bool> is_target;
    std::vector<std::vector<std::string>> action_names;    // empty = absorbing
    std::vector<std::vector<std::vector<int>>> succ;       // sorted successor ids

    int num_states() const { return static_cast<int>(states.size()); }
    bool absorbing(int s) const { return action_names[static_cast<std::size_t>(s)].empty(); }
};

/// Parse the JSON model document (keys states/initial/target/actions).
Mdp parse_model(const std::string& text);

/// Serialize back to the document format; implicit absorbing states stay omitted
/// from `actions`, so parse(serialize(m)) == m.
std::string serialize_model(const Mdp& m);

SupportMdp support_view(const Mdp& m);

/// Per-state adjacency for the graph analyses; absorbing states get one
/// synthetic self-loop action.
std::vector<std::vector<std::vector<int>>> support_adjacency(const SupportMdp& g);

/// Max reachability probability of the target set from every state, within tol.
/// Ground-truth oracle: value-0/1 analysis, MEC collapse, then two-sided value
/// iteration until the remaining gap is below tol.
std::vector<double> exact_reachability_value(const Mdp& m, double tol = 1e-10);

}  // namespace smc::model

#endif
