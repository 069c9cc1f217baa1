#ifndef SMC_GRAPH_HPP
#define SMC_GRAPH_HPP

#include <utility>
#include <vector>

namespace smc::graph {

/// state -> action -> successor ids. Every state must have at least one action
/// (add a self-loop for absorbing states before calling).
using Adjacency = std::vector<std::vector<std::vector<int>>>;

/// Tarjan SCC decomposition; components emitted in reverse topological order
/// (each component only has edges into earlier-emitted components).
std::vector<std::vector<int>> sccs(const Adjacency& g);

struct MecDecomposition {
    struct Mec {
        std::vector<int> states;                                // sorted
        std::vector<std::pair<int, int>> state_actions;         // retained (s, a)
    };
    std::vector<Mec> mecs;
    std::vector<int> mec_of;  // state -> MEC index or -1
};

/// Standard iterative MEC decomposition: SCCs interleaved with pruning of
/// actions whose support leaves the candidate component, to fixpoint.
MecDecomposition mec_decomposition(const Adjacency& g);

/// States with some strategy reaching the target almost surely (support only).
std::vector<bool> value1_states(const Adjacency& g, const std::vector<bool>& target);

/// States with no path to the target in the support graph.
std::vector<bool> value0_states(const Adjacency& g, const std::vector<bool>& target);

}  // namespace smc::graph

#endif
