#ifndef SMC_BUDGET_HPP
#define SMC_BUDGET_HPP

#include "smc/transform.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace smc::budget {

/// Estimation plan for one distribution (class, action) of the transformed model.
struct DistTasks {
    int cls = -1;
    int action_id = -1;
    std::vector<int> succ;        // the distribution's support (class ids)
    // Successors estimated directly. Small Support: |succ|=1 -> none,
    // |succ|=2 -> one (chosen at estimation time, the other mirrored),
    // |succ|>=3 -> all. Without Small Support every successor is direct.
    int direct_count = 0;
    bool complement = false;      // 2-successor rule active
};

struct TaskSet {
    std::vector<DistTasks> dists;
    std::int64_t total_direct() const;
};

/// Enumerate estimation tasks over live, initial-reachable, non-target,
/// non-goal/sink distributions of the transformed model.
TaskSet enumerate_tasks(const transform::ClassModel& cm, bool small_support);

enum class AllocationMode { Uniform, Independence };

struct BudgetPlan {
    double delta = 0.0;
    AllocationMode mode = AllocationMode::Uniform;
    std::vector<double> delta_d;  // per TaskSet distribution
    std::vector<double> delta_t;  // per TaskSet distribution (uniform within it)
};

/// delta_t = delta / total direct transitions, the plain union bound.
BudgetPlan uniform_allocation(const TaskSet& tasks, double delta);

/// delta_d = 1 - (1-delta)^(1/|D|) over the |D| distributions with tasks;
/// within a distribution of k direct transitions, delta_t = delta_d / k.
BudgetPlan independence_allocation(const TaskSet& tasks, double delta);

/// Audit serialization: array of {distribution, delta_d, transitions, delta_t}.
std::string plan_to_json(const transform::ClassModel& cm, const TaskSet& tasks,
                         const BudgetPlan& plan);

}  // namespace smc::budget

#endif
