#include "smc/budget.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace smc::budget {

std::int64_t TaskSet::total_direct() const {
    std::int64_t total = 0;
    for (const auto& d : dists) total += d.direct_count;
    return total;
}

TaskSet enumerate_tasks(const transform::ClassModel& cm, bool small_support) {
    TaskSet out;
    const auto reach = cm.reachable_live();
    for (int c : cm.live_classes()) {
        const auto& ci = cm.classes[static_cast<std::size_t>(c)];
        if (!reach[static_cast<std::size_t>(c)] || ci.is_target) continue;
        if (ci.kind == transform::ClassKind::Goal || ci.kind == transform::ClassKind::Sink)
            continue;
        for (int aid : ci.actions) {
            const auto& ar = cm.actions[static_cast<std::size_t>(aid)];
            DistTasks dt;
            dt.cls = c;
            dt.action_id = aid;
            dt.succ = ar.succ;
            const auto k = static_cast<int>(ar.succ.size());
            if (small_support) {
                if (k == 1) dt.direct_count = 0;       // probability is 1, nothing to learn
                else if (k == 2) {
                    dt.direct_count = 1;
                    dt.complement = true;
                } else dt.direct_count = k;
            } else {
                dt.direct_count = k;
            }
            out.dists.push_back(std::move(dt));
        }
    }
    return out;
}

BudgetPlan uniform_allocation(const TaskSet& tasks, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    BudgetPlan plan;
    plan.delta = delta;
    plan.mode = AllocationMode::Uniform;
    const auto total = tasks.total_direct();
    plan.delta_d.resize(tasks.dists.size(), 0.0);
    plan.delta_t.resize(tasks.dists.size(), 0.0);
    if (total == 0) return plan;
    const double dt = delta / static_cast<double>(total);
    for (std::size_t i = 0; i < tasks.dists.size(); ++i) {
        if (tasks.dists[i].direct_count == 0) continue;
        plan.delta_t[i] = dt;
        plan.delta_d[i] = dt * tasks.dists[i].direct_count;
    }
    return plan;
}

BudgetPlan independence_allocation(const TaskSet& tasks, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    BudgetPlan plan;
    plan.delta = delta;
    plan.mode = AllocationMode::Independence;
    plan.delta_d.resize(tasks.dists.size(), 0.0);
    plan.delta_t.resize(tasks.dists.size(), 0.0);
    std::int64_t with_tasks = 0;
    for (const auto& d : tasks.dists)
        if (d.direct_count > 0) ++with_tasks;
    if (with_tasks == 0) return plan;
    // product over distributions of (1 - delta_d) equals 1 - delta exactly
    const double dd = -std::expm1(std::log1p(-delta) / static_cast<double>(with_tasks));
    for (std::size_t i = 0; i < tasks.dists.size(); ++i) {
        if (tasks.dists[i].direct_count == 0) continue;
        plan.delta_d[i] = dd;
        plan.delta_t[i] = dd / static_cast<double>(tasks.dists[i].direct_count);
    }
    return plan;
}

std::string plan_to_json(const transform::ClassModel& cm, const TaskSet& tasks,
                         const BudgetPlan& plan) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < tasks.dists.size(); ++i) {
        const auto& d = tasks.dists[i];
        nlohmann::ordered_json e;
        e["distribution"] = cm.classes[static_cast<std::size_t>(d.cls)].name + "/" +
                            cm.actions[static_cast<std::size_t>(d.action_id)].name;
        e["delta_d"] = plan.delta_d[i];
        e["transitions"] = d.direct_count;
        e["delta_t"] = plan.delta_t[i];
        doc.push_back(std::move(e));
    }
    return doc.dump(2) + "\n";
}

}  // namespace smc::budget
