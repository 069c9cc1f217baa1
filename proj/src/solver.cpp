#include "smc/solver.hpp"

#include "smc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace smc::solver {

namespace {
constexpr double kFeasTol = 1e-9;
constexpr int kPhantomId = std::numeric_limits<int>::max();
}  // namespace

double robust_bellman(const IntervalDist& d, const std::vector<double>& values,
                      bool optimistic) {
    struct Entry {
        double v, lo, hi;
        int id;
    };
    std::vector<Entry> es;
    es.reserve(d.succ.size() + 1);
    double sum_lo = 0.0, sum_hi = 0.0;
    for (std::size_t i = 0; i < d.succ.size(); ++i) {
        es.push_back({values[static_cast<std::size_t>(d.succ[i])], d.lo[i], d.hi[i],
                      d.succ[i]});
        sum_lo += d.lo[i];
        sum_hi += d.hi[i];
    }
    if (d.open) {
        es.push_back({optimistic ? 1.0 : 0.0, 0.0, 1.0, kPhantomId});
        sum_hi += 1.0;
    }
    if (sum_lo > 1.0 + kFeasTol) throw InfeasibleError("interval lower bounds exceed 1");
    if (sum_hi < 1.0 - kFeasTol) throw InfeasibleError("interval upper bounds below 1");

    std::sort(es.begin(), es.end(), [optimistic](const Entry& a, const Entry& b) {
        if (a.v != b.v) return optimistic ? a.v > b.v : a.v < b.v;
        return a.id < b.id;
    });
    double remaining = std::max(0.0, 1.0 - sum_lo);
    double val = 0.0;
    for (const auto& e : es) {
        const double add = std::clamp(remaining, 0.0, e.hi - e.lo);
        remaining -= add;
        val += (e.lo + add) * e.v;
    }
    return val;
}

ValueBounds interval_iteration(const IntervalMdp& imdp, double kappa,
                               std::int64_t max_sweeps) {
    const int n = imdp.num_states();
    const int phantom = n;

    // Support adjacency with a phantom sink for open distributions: the
    // unknown successor never certifies value 1 and may reach the target, so
    // it blocks both support-based classifications.
    graph::Adjacency adj(static_cast<std::size_t>(n) + 1);
    for (int s = 0; s < n; ++s) {
        const auto& acts = imdp.act[static_cast<std::size_t>(s)];
        if (acts.empty()) {
            adj[static_cast<std::size_t>(s)] = {{s}};
            continue;
        }
        for (const auto& d : acts) {
            auto succ = d.succ;
            if (d.open) succ.push_back(phantom);
            adj[static_cast<std::size_t>(s)].push_back(std::move(succ));
        }
    }
    adj[static_cast<std::size_t>(phantom)] = {{phantom}};

    std::vector<bool> target(static_cast<std::size_t>(n) + 1, false);
    for (int s = 0; s < n; ++s)
        target[static_cast<std::size_t>(s)] = imdp.is_target[static_cast<std::size_t>(s)];
    const auto v1 = graph::value1_states(adj, target);
    auto target0 = target;
    target0[static_cast<std::size_t>(phantom)] = true;  // unknown successor may be a target
    const auto v0 = graph::value0_states(adj, target0);

    // End components among the undecided states (value-1/value-0 states made
    // absorbing first). They are collapsed so the upper sequence contracts.
    auto adj2 = adj;
    for (int s = 0; s < n; ++s)
        if (v1[static_cast<std::size_t>(s)] || v0[static_cast<std::size_t>(s)])
            adj2[static_cast<std::size_t>(s)] = {{s}};
    const auto mecs = graph::mec_decomposition(adj2);

    // Solve-state ids: 0 = goal, 1 = sink, then one per undecided MEC or state.
    constexpr int kGoal = 0, kSink = 1;
    std::vector<int> sol_of(static_cast<std::size_t>(n), -1);
    std::vector<int> mec_sol(mecs.mecs.size(), -1);
    int num_sol = 2;
    auto middle = [&](int s) {
        return !v1[static_cast<std::size_t>(s)] && !v0[static_cast<std::size_t>(s)];
    };
    for (int s = 0; s < n; ++s) {
        if (v1[static_cast<std::size_t>(s)]) {
            sol_of[static_cast<std::size_t>(s)] = kGoal;
        } else if (v0[static_cast<std::size_t>(s)]) {
            sol_of[static_cast<std::size_t>(s)] = kSink;
        } else {
            const int mi = mecs.mec_of[static_cast<std::size_t>(s)];
            if (mi >= 0) {
                if (mec_sol[static_cast<std::size_t>(mi)] < 0)
                    mec_sol[static_cast<std::size_t>(mi)] = num_sol++;
                sol_of[static_cast<std::size_t>(s)] = mec_sol[static_cast<std::size_t>(mi)];
            } else {
                sol_of[static_cast<std::size_t>(s)] = num_sol++;
            }
        }
    }

    std::vector<std::vector<IntervalDist>> sol_act(static_cast<std::size_t>(num_sol));
    for (int s = 0; s < n; ++s) {
        if (!middle(s)) continue;
        const int mi = mecs.mec_of[static_cast<std::size_t>(s)];
        const std::vector<int>* members =
            mi >= 0 ? &mecs.mecs[static_cast<std::size_t>(mi)].states : nullptr;
        auto inside = [&](int w) {
            return members && std::binary_search(members->begin(), members->end(), w);
        };
        for (const auto& d : imdp.act[static_cast<std::size_t>(s)]) {
            double in_hi = 0.0;
            bool leaves = d.open;
            for (std::size_t i = 0; i < d.succ.size(); ++i) {
                if (inside(d.succ[i]))
                    in_hi += d.hi[i];
                else
                    leaves = true;
            }
            if (!leaves) continue;  // internal to the collapsed component
            // Conditional renormalization over-approximation: the true
            // conditional leaving probability of w lies in
            // [lo_w, min(1, hi_w / (1 - sum of inside upper bounds))].
            const double denom = 1.0 - in_hi;
            IntervalDist q;
            q.open = d.open;
            std::map<int, std::pair<double, double>> acc;
            for (std::size_t i = 0; i < d.succ.size(); ++i) {
                const int w = d.succ[i];
                if (inside(w)) continue;
                double qlo = d.lo[i];
                double qhi = d.hi[i];
                if (members) qhi = denom > 0.0 ? std::min(1.0, qhi / denom) : 1.0;
                auto& slot = acc[sol_of[static_cast<std::size_t>(w)]];
                slot.first += qlo;
                slot.second = std::min(1.0, slot.second + qhi);
            }
            for (const auto& [w, bounds] : acc) {
                q.succ.push_back(w);
                q.lo.push_back(bounds.first);
                q.hi.push_back(bounds.second);
            }
            sol_act[static_cast<std::size_t>(sol_of[static_cast<std::size_t>(s)])]
                .push_back(std::move(q));
        }
    }

    // Reverse topological sweep order over the collapsed graph.
    graph::Adjacency sol_adj(static_cast<std::size_t>(num_sol));
    for (int s = 0; s < num_sol; ++s) {
        if (sol_act[static_cast<std::size_t>(s)].empty()) {
            sol_adj[static_cast<std::size_t>(s)] = {{s}};
            continue;
        }
        for (const auto& d : sol_act[static_cast<std::size_t>(s)])
            sol_adj[static_cast<std::size_t>(s)].push_back(d.succ);
    }
    std::vector<int> order;
    for (const auto& comp : graph::sccs(sol_adj))
        for (int s : comp) order.push_back(s);

    std::vector<double> lo(static_cast<std::size_t>(num_sol), 0.0);
    std::vector<double> hi(static_cast<std::size_t>(num_sol), 1.0);
    lo[kGoal] = 1.0;
    hi[kSink] = 0.0;

    ValueBounds out;
    const double stop = kappa / 4.0;
    for (out.sweeps = 0; out.sweeps < max_sweeps; ++out.sweeps) {
        double ch_lo = 0.0, ch_hi = 0.0;
        for (int s : order) {
            const auto& acts = sol_act[static_cast<std::size_t>(s)];
            if (s == kGoal || s == kSink || acts.empty()) continue;
            double best_lo = 0.0, best_hi = 0.0;
            for (const auto& d : acts) {
                best_lo = std::max(best_lo, robust_bellman(d, lo, false));
                best_hi = std::max(best_hi, robust_bellman(d, hi, true));
            }
            auto& cl = lo[static_cast<std::size_t>(s)];
            auto& ch = hi[static_cast<std::size_t>(s)];
            if (best_lo > cl) {
                ch_lo = std::max(ch_lo, best_lo - cl);
                cl = best_lo;
            }
            if (best_hi < ch) {
                ch_hi = std::max(ch_hi, ch - best_hi);
                ch = best_hi;
            }
        }
        if (ch_lo < stop && ch_hi < stop) {
            ++out.sweeps;
            out.converged = true;
            break;
        }
    }

    out.lo.resize(static_cast<std::size_t>(n));
    out.hi.resize(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        const int w = sol_of[static_cast<std::size_t>(s)];
        out.lo[static_cast<std::size_t>(s)] = lo[static_cast<std::size_t>(w)];
        out.hi[static_cast<std::size_t>(s)] = hi[static_cast<std::size_t>(w)];
    }
    return out;
}

}  // namespace smc::solver
