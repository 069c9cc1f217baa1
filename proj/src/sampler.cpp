#include "smc/sampler.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace smc::sampler {

void CountsTable::resize(std::size_t num_actions) {
    if (n.size() < num_actions) {
        n.resize(num_actions, 0);
        k.resize(num_actions);
    }
}

void CountsTable::add(int action_id, int succ_cls) {
    auto a = static_cast<std::size_t>(action_id);
    ++n[a];
    ++k[a][succ_cls];
}

void CountsTable::merge(const CountsTable& other) {
    resize(other.n.size());
    for (std::size_t a = 0; a < other.n.size(); ++a) {
        n[a] += other.n[a];
        for (const auto& [succ, cnt] : other.k[a]) k[a][succ] += cnt;
    }
    paths += other.paths;
    capped_paths += other.capped_paths;
}

bool CountsTable::consistent() const {
    for (std::size_t a = 0; a < n.size(); ++a) {
        std::int64_t sum = 0;
        for (const auto& [succ, cnt] : k[a]) {
            if (cnt < 0) return false;
            sum += cnt;
        }
        if (sum != n[a]) return false;
    }
    return true;
}

Sampler::Sampler(const model::Mdp& m, const transform::ClassModel& cm, SamplerConfig cfg)
    : m_(m), cm_(cm), cfg_(cfg), rng_(cfg.seed) {
    if (cfg_.step_cap < 1) throw std::invalid_argument("step cap must be >= 1");
    if (cfg_.mode == Mode::Black && !(cfg_.p_min > 0.0 && cfg_.p_min <= 1.0))
        throw std::invalid_argument("p_min must be in (0,1] in black mode");
}

int Sampler::sample_ground(int state, int ground_action, std::int64_t& steps) {
    const auto& dist = m_.dist[static_cast<std::size_t>(state)][static_cast<std::size_t>(ground_action)];
    const double u = rng_.uniform();
    double acc = 0.0;
    int out = dist.back().first;
    for (const auto& [succ, p] : dist) {
        acc += p;
        if (u < acc) {
            out = succ;
            break;
        }
    }
    ++steps;
    return out;
}

// Shortest-hop policy toward `owner` inside a collapsed end component, using
// only actions whose support stays within the component. Every member keeps
// such an action by the end-component property, so the policy is total and
// reaches the owner with probability one.
const std::vector<int>& Sampler::nav_policy(int cls, int owner) {
    const auto key = std::make_pair(cls, owner);
    if (auto it = nav_.find(key); it != nav_.end()) return it->second;

    const auto& members = cm_.classes[static_cast<std::size_t>(cls)].ground_states;
    const auto nm = members.size();
    auto pos_of = [&](int s) {
        return static_cast<std::size_t>(
            std::lower_bound(members.begin(), members.end(), s) - members.begin());
    };
    auto internal = [&](int s, int a) {
        const auto& succ = cm_.support.succ[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        return std::includes(members.begin(), members.end(), succ.begin(), succ.end());
    };

    std::vector<int> dist(nm, -1);
    std::vector<int> act(nm, -1);
    dist[pos_of(owner)] = 0;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < nm; ++i) {
            if (dist[i] >= 0) continue;
            const int s = members[i];
            const auto na = static_cast<int>(m_.action_names[static_cast<std::size_t>(s)].size());
            int best = -1, best_d = -1;
            for (int a = 0; a < na; ++a) {
                if (!internal(s, a)) continue;
                for (int t : cm_.support.succ[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) {
                    const int d = dist[pos_of(t)];
                    if (d >= 0 && (best < 0 || d < best_d)) {
                        best = a;
                        best_d = d;
                    }
                }
            }
            if (best >= 0) {
                dist[i] = best_d + 1;
                act[i] = best;
                changed = true;
            }
        }
    }
    return nav_.emplace(key, std::move(act)).first->second;
}

std::optional<Sampler::Outcome> Sampler::run_action(int action_id, int& ground,
                                                    std::int64_t& steps) {
    const auto& ar = cm_.actions[static_cast<std::size_t>(action_id)];
    if (ar.kind == transform::ActionKind::Ground) {
        const auto& owner_cls = cm_.classes[static_cast<std::size_t>(ar.cls)];
        if (owner_cls.kind == transform::ClassKind::Mec) {
            const auto& members = owner_cls.ground_states;
            const auto& nav = nav_policy(ar.cls, ar.owner_state);
            while (true) {
                while (ground != ar.owner_state) {
                    if (steps >= cfg_.step_cap) return std::nullopt;
                    const auto pos = static_cast<std::size_t>(
                        std::lower_bound(members.begin(), members.end(), ground) -
                        members.begin());
                    ground = sample_ground(ground, nav[pos], steps);
                }
                if (steps >= cfg_.step_cap) return std::nullopt;
                ground = sample_ground(ar.owner_state, ar.ground_action, steps);
                const int c = cm_.class0[static_cast<std::size_t>(ground)];
                if (c != ar.cls) return Outcome{c, ground};
                // stayed inside the component: retry, estimating the
                // conditional leaving distribution
            }
        }
        if (steps >= cfg_.step_cap) return std::nullopt;
        ground = sample_ground(ar.owner_state, ar.ground_action, steps);
        return Outcome{cm_.class0[static_cast<std::size_t>(ground)], ground};
    }

    // Macro: run the base action, then follow the frozen internal strategy
    // until the walk leaves the fragment. The traversal yields one observation.
    auto out = run_action(ar.base_action, ground, steps);
    const auto& fr = cm_.fragments[static_cast<std::size_t>(ar.fragment)];
    while (out) {
        const int pos = cm_.member_position(ar.fragment, out->cls);
        if (pos < 0) break;
        out = run_action(fr.strategies[static_cast<std::size_t>(ar.strategy)]
                                      [static_cast<std::size_t>(pos)],
                         ground, steps);
    }
    return out;
}

PathSummary Sampler::sample_path(CountsTable& counts) {
    counts.resize(cm_.actions.size());
    PathSummary ps;
    int cls = cm_.initial_class;
    int ground = m_.initial;
    std::int64_t steps = 0;
    while (true) {
        const auto& ci = cm_.classes[static_cast<std::size_t>(cls)];
        if (ci.terminal || ci.actions.empty()) break;
        const int aid =
            ci.actions[rng_.below(static_cast<std::uint64_t>(ci.actions.size()))];
        const auto out = run_action(aid, ground, steps);
        if (!out) {
            ps.capped = true;
            break;
        }
        counts.add(aid, out->cls);
        cls = out->cls;
        ground = out->ground;
    }
    ps.steps = steps;
    ps.final_class = cls;
    ps.reached_target = cm_.classes[static_cast<std::size_t>(cls)].is_target;
    if (ps.capped)
        ++counts.capped_paths;
    else
        ++counts.paths;
    return ps;
}

bool support_complete(const CountsTable& counts, int action_id, stats::CiMethod method,
                      double delta_t, double p_min) {
    const auto a = static_cast<std::size_t>(action_id);
    if (a >= counts.n.size() || counts.n[a] == 0) return false;
    double lo_sum = 0.0;
    for (const auto& [succ, cnt] : counts.k[a]) {
        stats::SampleCounts c;
        c.n = counts.n[a];
        c.k = cnt;
        lo_sum += stats::confidence_interval(method, c, delta_t).lo;
    }
    return lo_sum > 1.0 - p_min;
}

std::string counts_to_csv(const transform::ClassModel& cm, const CountsTable& counts) {
    std::ostringstream os;
    os << "state,action,successor,n,k\n";
    for (std::size_t a = 0; a < counts.n.size(); ++a) {
        if (counts.n[a] == 0) continue;
        const auto& ar = cm.actions[a];
        const auto& owner = cm.classes[static_cast<std::size_t>(ar.cls)].name;
        for (const auto& [succ, cnt] : counts.k[a])
            os << owner << ',' << ar.name << ','
               << cm.classes[static_cast<std::size_t>(succ)].name << ',' << counts.n[a]
               << ',' << cnt << '\n';
    }
    return os.str();
}

}  // namespace smc::sampler
