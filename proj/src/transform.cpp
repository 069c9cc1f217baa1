#include "smc/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace smc::transform {

namespace {

std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

bool contains(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
}

} // namespace

std::vector<int> ClassModel::live_classes() const {
    std::vector<int> out;
    for (int c = 0; c < static_cast<int>(classes.size()); ++c)
        if (!classes[static_cast<std::size_t>(c)].retired) out.push_back(c);
    return out;
}

std::vector<bool> ClassModel::reachable_live() const {
    std::vector<bool> seen(classes.size(), false);
    std::vector<int> stack{initial_class};
    seen[static_cast<std::size_t>(initial_class)] = true;
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        for (int aid : classes[static_cast<std::size_t>(c)].actions)
            for (int w : actions[static_cast<std::size_t>(aid)].succ)
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    stack.push_back(w);
                }
    }
    return seen;
}

std::size_t ClassModel::live_transition_count() const {
    const auto reach = reachable_live();
    std::size_t total = 0;
    for (int c : live_classes()) {
        const auto& ci = classes[static_cast<std::size_t>(c)];
        if (!reach[static_cast<std::size_t>(c)] || ci.is_target) continue;
        if (ci.kind == ClassKind::Goal || ci.kind == ClassKind::Sink) continue;
        for (int aid : ci.actions) total += actions[static_cast<std::size_t>(aid)].succ.size();
    }
    return total;
}

int ClassModel::member_position(int fragment, int cls) const {
    const auto& mem = fragments[static_cast<std::size_t>(fragment)].members;
    const auto it = std::lower_bound(mem.begin(), mem.end(), cls);
    if (it == mem.end() || *it != cls) return -1;
    return static_cast<int>(it - mem.begin());
}

namespace {

// Stage A: build the post-merge, post-collapse class partition and its actions.
void build_base(ClassModel& cm, bool equivalence) {
    const auto& g = cm.support;
    const int n = g.num_states();
    cm.class0.assign(static_cast<std::size_t>(n), -1);

    const auto new_class = [&](ClassKind kind, std::string name) {
        ClassInfo ci;
        ci.kind = kind;
        ci.name = std::move(name);
        cm.classes.push_back(std::move(ci));
        return static_cast<int>(cm.classes.size()) - 1;
    };

    std::vector<bool> v1, v0;
    graph::MecDecomposition mecs;
    if (equivalence) {
        const auto adj = model::support_adjacency(g);
        v1 = graph::value1_states(adj, g.is_target);
        v0 = graph::value0_states(adj, g.is_target);
        mecs = graph::mec_decomposition(adj);
        std::vector<int> mec_class(mecs.mecs.size(), -1);
        for (int s = 0; s < n; ++s) {
            const auto si = static_cast<std::size_t>(s);
            if (v1[si]) {
                if (cm.goal_class < 0) cm.goal_class = new_class(ClassKind::Goal, "GOAL");
                cm.class0[si] = cm.goal_class;
            } else if (v0[si]) {
                if (cm.sink_class < 0) cm.sink_class = new_class(ClassKind::Sink, "SINK");
                cm.class0[si] = cm.sink_class;
            } else if (mecs.mec_of[si] >= 0) {
                const auto mi = static_cast<std::size_t>(mecs.mec_of[si]);
                if (mec_class[mi] < 0)
                    mec_class[mi] = new_class(ClassKind::Mec, "MEC(" + g.states[si] + ")");
                cm.class0[si] = mec_class[mi];
            } else {
                cm.class0[si] = new_class(ClassKind::Plain, g.states[si]);
            }
            cm.classes[static_cast<std::size_t>(cm.class0[si])].ground_states.push_back(s);
        }
        if (cm.goal_class >= 0) {
            auto& goal = cm.classes[static_cast<std::size_t>(cm.goal_class)];
            goal.terminal = goal.is_target = true;
        }
        if (cm.sink_class >= 0) cm.classes[static_cast<std::size_t>(cm.sink_class)].terminal = true;
        std::size_t n_goal = cm.goal_class >= 0
            ? cm.classes[static_cast<std::size_t>(cm.goal_class)].ground_states.size() : 0;
        std::size_t n_sink = cm.sink_class >= 0
            ? cm.classes[static_cast<std::size_t>(cm.sink_class)].ground_states.size() : 0;
        std::ostringstream os;
        os << "value-merge: goal=" << n_goal << " sink=" << n_sink;
        cm.report.push_back(os.str());
        int collapsed = 0;
        for (const auto& mec : mecs.mecs) {
            const auto rep = static_cast<std::size_t>(mec.states.front());
            if (v1[rep] || v0[rep]) continue;  // merged already
            ++collapsed;
            std::ostringstream ms;
            ms << "mec-collapse: {";
            for (std::size_t i = 0; i < mec.states.size(); ++i)
                ms << (i ? "," : "") << g.states[static_cast<std::size_t>(mec.states[i])];
            ms << "}";
            cm.report.push_back(ms.str());
        }
        (void)collapsed;
    } else {
        const auto adj = model::support_adjacency(g);
        v0 = graph::value0_states(adj, g.is_target);  // used for sampling termination only
        for (int s = 0; s < n; ++s) {
            const auto si = static_cast<std::size_t>(s);
            cm.class0[si] = new_class(ClassKind::Plain, g.states[si]);
            auto& ci = cm.classes[static_cast<std::size_t>(cm.class0[si])];
            ci.ground_states.push_back(s);
            if (g.is_target[si]) ci.terminal = ci.is_target = true;
            else if (g.absorbing(s) || v0[si]) ci.terminal = true;
        }
    }

    // Actions. Ground actions of target/goal/sink classes are dropped (terminal).
    const auto is_internal = [&](int s, int a) {
        if (!equivalence) return false;
        const int mi = mecs.mec_of[static_cast<std::size_t>(s)];
        if (mi < 0) return false;
        for (const auto& [ms, ma] : mecs.mecs[static_cast<std::size_t>(mi)].state_actions)
            if (ms == s && ma == a) return true;
        return false;
    };
    for (int c = 0; c < static_cast<int>(cm.classes.size()); ++c) {
        auto& ci = cm.classes[static_cast<std::size_t>(c)];
        if (ci.kind == ClassKind::Goal || ci.kind == ClassKind::Sink || ci.is_target) continue;
        for (int s : ci.ground_states) {
            const auto si = static_cast<std::size_t>(s);
            for (int a = 0; a < static_cast<int>(g.succ[si].size()); ++a) {
                if (is_internal(s, a)) continue;
                ActionRec ar;
                ar.cls = c;
                ar.kind = ActionKind::Ground;
                ar.owner_state = s;
                ar.ground_action = a;
                ar.name = ci.kind == ClassKind::Mec
                    ? g.states[si] + "." + g.action_names[si][static_cast<std::size_t>(a)]
                    : g.action_names[si][static_cast<std::size_t>(a)];
                std::vector<int> succ;
                for (int w : g.succ[si][static_cast<std::size_t>(a)]) {
                    const int wc = cm.class0[static_cast<std::size_t>(w)];
                    if (ci.kind == ClassKind::Mec && wc == c) continue;  // conditional
                    succ.push_back(wc);
                }
                succ = sorted_unique(succ);
                if (succ.empty()) continue;  // fully internal under conditioning
                ar.succ = std::move(succ);
                ci.actions.push_back(static_cast<int>(cm.actions.size()));
                cm.actions.push_back(std::move(ar));
            }
        }
    }
    cm.initial_class = cm.class0[static_cast<std::size_t>(g.initial)];
}

std::vector<std::vector<int>> enumerate_strategies(const ClassModel& cm,
                                                   const std::vector<int>& r,
                                                   std::int64_t cap) {
    std::int64_t total = 1;
    for (int c : r) {
        const auto sz = static_cast<std::int64_t>(
            cm.classes[static_cast<std::size_t>(c)].actions.size());
        if (sz == 0) return {};
        total *= sz;
        if (total > cap) return {};
    }
    std::vector<std::vector<int>> out;
    out.reserve(static_cast<std::size_t>(total));
    std::vector<std::size_t> idx(r.size(), 0);
    while (true) {
        std::vector<int> chosen(r.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            chosen[i] = cm.classes[static_cast<std::size_t>(r[i])].actions[idx[i]];
        out.push_back(std::move(chosen));
        std::size_t i = r.size();
        while (i > 0) {
            --i;
            if (++idx[i] < cm.classes[static_cast<std::size_t>(r[i])].actions.size()) break;
            idx[i] = 0;
            if (i == 0) return out;
        }
        if (r.empty()) return out;
    }
}

} // namespace

std::vector<int> macro_support(const ClassModel& cm, const std::vector<int>& r,
                               const std::vector<int>& chosen, int base_action) {
    std::set<int> out;
    std::vector<int> frontier;
    std::set<int> visited;
    for (int w : cm.actions[static_cast<std::size_t>(base_action)].succ) {
        if (contains(r, w)) {
            if (visited.insert(w).second) frontier.push_back(w);
        } else {
            out.insert(w);
        }
    }
    while (!frontier.empty()) {
        const int m = frontier.back();
        frontier.pop_back();
        const auto pos = static_cast<std::size_t>(
            std::lower_bound(r.begin(), r.end(), m) - r.begin());
        const int aid = chosen[pos];
        for (int w : cm.actions[static_cast<std::size_t>(aid)].succ) {
            if (contains(r, w)) {
                if (visited.insert(w).second) frontier.push_back(w);
            } else {
                out.insert(w);
            }
        }
    }
    return {out.begin(), out.end()};
}

bool fragment_ec_free(const ClassModel& cm, const std::vector<int>& r) {
    const int k = static_cast<int>(r.size());
    graph::Adjacency adj(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i < k; ++i) {
        const auto& ci = cm.classes[static_cast<std::size_t>(r[static_cast<std::size_t>(i)])];
        if (ci.actions.empty()) return false;  // the walk could get stuck
        for (int aid : ci.actions) {
            std::vector<int> succ;
            for (int w : cm.actions[static_cast<std::size_t>(aid)].succ) {
                if (contains(r, w))
                    succ.push_back(static_cast<int>(
                        std::lower_bound(r.begin(), r.end(), w) - r.begin()));
                else
                    succ.push_back(k);
            }
            adj[static_cast<std::size_t>(i)].push_back(sorted_unique(std::move(succ)));
        }
    }
    adj[static_cast<std::size_t>(k)].push_back({k});  // exit sink
    const auto mecs = graph::mec_decomposition(adj);
    for (const auto& mec : mecs.mecs)
        if (!std::binary_search(mec.states.begin(), mec.states.end(), k)) return false;
    return true;
}

std::pair<std::int64_t, std::int64_t> fragment_cost(const ClassModel& cm,
                                                    const std::vector<int>& r) {
    std::int64_t direct = 0;
    for (int c : r)
        for (int aid : cm.classes[static_cast<std::size_t>(c)].actions)
            direct += static_cast<std::int64_t>(cm.actions[static_cast<std::size_t>(aid)].succ.size());
    const auto strategies = enumerate_strategies(cm, r, std::int64_t{1} << 20);
    if (strategies.empty())
        return {std::numeric_limits<std::int64_t>::max(), direct};
    std::int64_t quotient = 0;
    for (int c : cm.live_classes()) {
        if (contains(r, c)) continue;
        for (int aid : cm.classes[static_cast<std::size_t>(c)].actions) {
            const auto& ar = cm.actions[static_cast<std::size_t>(aid)];
            bool enters = false;
            for (int w : ar.succ)
                if (contains(r, w)) enters = true;
            if (!enters) continue;
            for (const auto& chosen : strategies)
                quotient += static_cast<std::int64_t>(macro_support(cm, r, chosen, aid).size());
        }
    }
    return {quotient, direct};
}

namespace {

void apply_fragment(ClassModel& cm, const std::vector<int>& r, const char* label) {
    const int fid = static_cast<int>(cm.fragments.size());
    FragmentRec fr;
    fr.members = r;
    fr.strategies = enumerate_strategies(cm, r, std::int64_t{1} << 20);
    if (fr.strategies.empty()) throw std::logic_error("fragment strategy set empty");
    for (const auto& chosen : fr.strategies) {
        std::string name;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) name += ",";
            name += cm.classes[static_cast<std::size_t>(r[i])].name + ":" +
                    cm.actions[static_cast<std::size_t>(chosen[i])].name;
        }
        fr.strategy_names.push_back(std::move(name));
    }

    for (int c : cm.live_classes()) {
        if (contains(r, c)) continue;
        auto& ci = cm.classes[static_cast<std::size_t>(c)];
        std::vector<int> new_actions;
        for (int aid : ci.actions) {
            // copy: pushing macros below may reallocate cm.actions
            const ActionRec ar = cm.actions[static_cast<std::size_t>(aid)];
            bool enters = false;
            for (int w : ar.succ)
                if (contains(r, w)) enters = true;
            if (!enters) {
                new_actions.push_back(aid);
                continue;
            }
            for (int s = 0; s < static_cast<int>(fr.strategies.size()); ++s) {
                ActionRec macro;
                macro.cls = c;
                macro.kind = ActionKind::Macro;
                macro.base_action = aid;
                macro.fragment = fid;
                macro.strategy = s;
                macro.name = ar.name + "|" + fr.strategy_names[static_cast<std::size_t>(s)];
                macro.succ = macro_support(cm, r, fr.strategies[static_cast<std::size_t>(s)], aid);
                new_actions.push_back(static_cast<int>(cm.actions.size()));
                cm.actions.push_back(std::move(macro));
            }
        }
        ci.actions = std::move(new_actions);
    }

    std::ostringstream os;
    os << label << ": {";
    for (std::size_t i = 0; i < r.size(); ++i)
        os << (i ? "," : "") << cm.classes[static_cast<std::size_t>(r[i])].name;
    os << "} strategies=" << fr.strategies.size();
    cm.report.push_back(os.str());

    for (int c : r) {
        auto& ci = cm.classes[static_cast<std::size_t>(c)];
        ci.retired = true;
        ci.retired_into = fid;
    }
    cm.fragments.push_back(std::move(fr));
}

bool candidate_admissible(const ClassModel& cm, const std::vector<int>& r) {
    for (int c : r) {
        const auto& ci = cm.classes[static_cast<std::size_t>(c)];
        if (c == cm.initial_class || ci.terminal || ci.is_target || ci.actions.empty())
            return false;
        if (ci.kind == ClassKind::Goal || ci.kind == ClassKind::Sink) return false;
    }
    return fragment_ec_free(cm, r);
}

} // namespace

std::vector<int> chain_candidates(const ClassModel& cm) {
    const auto live = cm.live_classes();
    std::map<int, int> incoming;  // class -> count of live entering transitions
    for (int c : live)
        for (int aid : cm.classes[static_cast<std::size_t>(c)].actions)
            for (int w : cm.actions[static_cast<std::size_t>(aid)].succ)
                if (w != c) ++incoming[w];
    std::vector<int> out;
    for (int c : live) {
        auto it = incoming.find(c);
        if (it == incoming.end() || it->second != 1) continue;
        if (candidate_admissible(cm, {c})) out.push_back(c);
    }
    return out;
}

ClassModel build_class_model(const model::SupportMdp& g, const TransformOptions& opt) {
    ClassModel cm;
    cm.support = g;
    build_base(cm, opt.equivalence);

    if (opt.scc_fragments) {
        while (true) {
            // SCCs of the live class graph, by compact index.
            const auto live = cm.live_classes();
            std::map<int, int> pos;
            for (std::size_t i = 0; i < live.size(); ++i) pos[live[i]] = static_cast<int>(i);
            graph::Adjacency adj(live.size());
            for (std::size_t i = 0; i < live.size(); ++i)
                for (int aid : cm.classes[static_cast<std::size_t>(live[i])].actions) {
                    std::vector<int> succ;
                    for (int w : cm.actions[static_cast<std::size_t>(aid)].succ)
                        succ.push_back(pos.at(w));
                    adj[i].push_back(std::move(succ));
                }
            bool applied = false;
            for (const auto& comp : graph::sccs(adj)) {
                if (comp.size() < 2) continue;
                std::vector<int> r;
                for (int i : comp) r.push_back(live[static_cast<std::size_t>(i)]);
                std::sort(r.begin(), r.end());
                if (!candidate_admissible(cm, r)) continue;
                const auto [q, d] = fragment_cost(cm, r);
                if (q < d) {
                    apply_fragment(cm, r, "scc-fragment");
                    applied = true;
                    break;  // recompute from scratch
                }
            }
            if (!applied) break;
        }
    }

    if (opt.chains) {
        while (true) {
            bool applied = false;
            for (int c : chain_candidates(cm)) {
                const auto [q, d] = fragment_cost(cm, {c});
                if (q <= d + 1) {
                    apply_fragment(cm, {c}, "chain");
                    applied = true;
                    break;
                }
            }
            if (!applied) break;
        }
    }
    return cm;
}

std::vector<std::pair<int, double>> exact_action_distribution(const model::Mdp& m,
                                                              const ClassModel& cm,
                                                              int action_id) {
    const auto& ar = cm.actions[static_cast<std::size_t>(action_id)];
    std::map<int, double> acc;
    if (ar.kind == ActionKind::Ground) {
        const auto& ci = cm.classes[static_cast<std::size_t>(ar.cls)];
        const auto& dist = m.dist[static_cast<std::size_t>(ar.owner_state)]
                                 [static_cast<std::size_t>(ar.ground_action)];
        double self_mass = 0.0;
        for (const auto& [w, p] : dist) {
            const int wc = cm.class0[static_cast<std::size_t>(w)];
            if (ci.kind == ClassKind::Mec && wc == ar.cls) self_mass += p;
            else acc[wc] += p;
        }
        if (self_mass > 0.0) {
            if (self_mass >= 1.0) throw std::logic_error("leaving action with no exit mass");
            for (auto& [w, p] : acc) p /= (1.0 - self_mass);
        }
    } else {
        const auto base = exact_action_distribution(m, cm, ar.base_action);
        const auto& fr = cm.fragments[static_cast<std::size_t>(ar.fragment)];
        const auto& chosen = fr.strategies[static_cast<std::size_t>(ar.strategy)];
        const auto k = fr.members.size();
        // Member step distributions and the exit alphabet.
        std::vector<std::vector<std::pair<int, double>>> step(k);
        std::vector<int> exits;
        for (std::size_t i = 0; i < k; ++i) {
            step[i] = exact_action_distribution(m, cm, chosen[i]);
            for (const auto& [w, p] : step[i]) {
                (void)p;
                if (!contains(fr.members, w)) exits.push_back(w);
            }
        }
        exits = sorted_unique(exits);
        const auto e = exits.size();
        const auto exit_pos = [&](int w) {
            return static_cast<std::size_t>(
                std::lower_bound(exits.begin(), exits.end(), w) - exits.begin());
        };
        // Solve (I - A) X = B for member-to-exit absorption probabilities.
        std::vector<std::vector<double>> mat(k, std::vector<double>(k, 0.0));
        std::vector<std::vector<double>> rhs(k, std::vector<double>(e, 0.0));
        for (std::size_t i = 0; i < k; ++i) {
            mat[i][i] = 1.0;
            for (const auto& [w, p] : step[i]) {
                if (contains(fr.members, w)) {
                    const auto j = static_cast<std::size_t>(
                        std::lower_bound(fr.members.begin(), fr.members.end(), w) -
                        fr.members.begin());
                    mat[i][j] -= p;
                } else {
                    rhs[i][exit_pos(w)] += p;
                }
            }
        }
        // Gaussian elimination with partial pivoting.
        for (std::size_t col = 0; col < k; ++col) {
            std::size_t piv = col;
            for (std::size_t row = col + 1; row < k; ++row)
                if (std::fabs(mat[row][col]) > std::fabs(mat[piv][col])) piv = row;
            std::swap(mat[col], mat[piv]);
            std::swap(rhs[col], rhs[piv]);
            if (std::fabs(mat[col][col]) < 1e-14)
                throw std::logic_error("singular absorption system (end component?)");
            for (std::size_t row = 0; row < k; ++row) {
                if (row == col) continue;
                const double f = mat[row][col] / mat[col][col];
                if (f == 0.0) continue;
                for (std::size_t c2 = 0; c2 < k; ++c2) mat[row][c2] -= f * mat[col][c2];
                for (std::size_t c2 = 0; c2 < e; ++c2) rhs[row][c2] -= f * rhs[col][c2];
            }
        }
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t c2 = 0; c2 < e; ++c2) rhs[i][c2] /= mat[i][i];

        for (const auto& [w, p] : base) {
            if (contains(fr.members, w)) {
                const auto j = static_cast<std::size_t>(
                    std::lower_bound(fr.members.begin(), fr.members.end(), w) -
                    fr.members.begin());
                for (std::size_t c2 = 0; c2 < e; ++c2)
                    if (rhs[j][c2] > 0.0) acc[exits[c2]] += p * rhs[j][c2];
            } else {
                acc[w] += p;
            }
        }
    }
    return {acc.begin(), acc.end()};
}

double exact_transformed_value(const model::Mdp& m, const ClassModel& cm, double tol) {
    const auto live = cm.live_classes();
    std::map<int, int> pos;
    for (std::size_t i = 0; i < live.size(); ++i) pos[live[i]] = static_cast<int>(i);

    model::Mdp synth;
    for (int c : live) {
        synth.states.push_back("c" + std::to_string(c));
        synth.index.emplace(synth.states.back(), synth.num_states() - 1);
    }
    synth.initial = pos.at(cm.initial_class);
    synth.is_target.assign(live.size(), false);
    synth.action_names.resize(live.size());
    synth.dist.resize(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
        const auto& ci = cm.classes[static_cast<std::size_t>(live[i])];
        synth.is_target[i] = ci.is_target;
        if (ci.is_target) continue;  // terminal in the synthetic model
        for (int aid : ci.actions) {
            auto dist = exact_action_distribution(m, cm, aid);
            std::vector<std::pair<int, double>> mapped;
            for (const auto& [w, p] : dist) mapped.emplace_back(pos.at(w), p);
            synth.action_names[i].push_back(cm.actions[static_cast<std::size_t>(aid)].name);
            synth.dist[i].push_back(std::move(mapped));
        }
    }
    const auto values = model::exact_reachability_value(synth, tol);
    return values[static_cast<std::size_t>(synth.initial)];
}

}  // namespace smc::transform
