#ifndef SMC_SOLVER_HPP
#define SMC_SOLVER_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace smc::solver {

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One interval distribution: successor ids with probability bounds. A
/// feasible instantiation picks q in the box with sum 1. `open` marks a
/// distribution whose support may be incomplete (black-box mode before the
/// support is certified): it behaves as if an extra unknown successor with
/// bounds [0,1] existed, pessimistically worthless and optimistically perfect.
struct IntervalDist {
    std::vector<int> succ;
    std::vector<double> lo;
    std::vector<double> hi;
    bool open = false;
};

/// Interval MDP over dense state ids. States with no actions are absorbing.
struct IntervalMdp {
    int initial = 0;
    std::vector<bool> is_target;
    std::vector<std::vector<IntervalDist>> act;  // per state

    int num_states() const { return static_cast<int>(act.size()); }
};

struct ValueBounds {
    std::vector<double> lo;
    std::vector<double> hi;
    std::int64_t sweeps = 0;
    bool converged = false;

    double gap_at(int s) const {
        return hi[static_cast<std::size_t>(s)] - lo[static_cast<std::size_t>(s)];
    }
};

/// Exact inner optimum of the expected value over the distribution box:
/// greedy saturation in value order (descending when optimistic, ascending
/// when pessimistic; ties by successor id). Throws InfeasibleError when no
/// distribution fits the box.
double robust_bellman(const IntervalDist& d, const std::vector<double>& values,
                      bool optimistic);

/// Interval iteration for max reachability: a lower sequence from 0 and an
/// upper sequence from 1, Gauss-Seidel in reverse topological order. The
/// graph is preprocessed internally: support-certain value-1/value-0 states
/// are fixed, and end components are collapsed with conservatively widened
/// conditional intervals so the upper sequence contracts. Stops when the
/// per-sweep change of both sequences falls below kappa/4; `converged` is
/// false if the sweep cap is hit first (partial bounds are still sound).
ValueBounds interval_iteration(const IntervalMdp& imdp, double kappa = 1e-6,
                               std::int64_t max_sweeps = 1'000'000);

}  // namespace smc::solver

#endif
