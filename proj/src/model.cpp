#include "smc/model.hpp"
#include "smc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace smc::model {

using json = nlohmann::ordered_json;

std::size_t Mdp::num_transitions() const {
    std::size_t total = 0;
    for (const auto& per_state : dist)
        for (const auto& d : per_state) total += d.size();
    return total;
}

std::vector<int> Mdp::target_ids() const {
    std::vector<int> out;
    for (int s = 0; s < num_states(); ++s)
        if (is_target[static_cast<std::size_t>(s)]) out.push_back(s);
    return out;
}

Mdp parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("syntax error: ") + e.what());
    }
    if (!doc.is_object()) throw ModelError("model document must be a JSON object");
    for (const char* key : {"states", "initial", "target", "actions"})
        if (!doc.contains(key)) throw ModelError(std::string("missing key `") + key + "`");

    Mdp m;
    if (!doc["states"].is_array() || doc["states"].empty())
        throw ModelError("`states` must be a non-empty array of strings");
    for (const auto& s : doc["states"]) {
        if (!s.is_string()) throw ModelError("`states` entries must be strings");
        const std::string name = s.get<std::string>();
        if (m.index.count(name)) throw ModelError("duplicate state `" + name + "`");
        m.index.emplace(name, m.num_states());
        m.states.push_back(name);
    }
    const auto state_id = [&](const std::string& name, const char* role) {
        auto it = m.index.find(name);
        if (it == m.index.end())
            throw ModelError(std::string(role) + " references unknown state `" + name + "`");
        return it->second;
    };

    if (!doc["initial"].is_string()) throw ModelError("`initial` must be a string");
    m.initial = state_id(doc["initial"].get<std::string>(), "`initial`");

    m.is_target.assign(static_cast<std::size_t>(m.num_states()), false);
    if (!doc["target"].is_array()) throw ModelError("`target` must be an array");
    for (const auto& t : doc["target"]) {
        if (!t.is_string()) throw ModelError("`target` entries must be strings");
        m.is_target[static_cast<std::size_t>(state_id(t.get<std::string>(), "`target`"))] = true;
    }

    m.action_names.resize(static_cast<std::size_t>(m.num_states()));
    m.dist.resize(static_cast<std::size_t>(m.num_states()));
    if (!doc["actions"].is_object()) throw ModelError("`actions` must be an object");
    for (const auto& [sname, acts] : doc["actions"].items()) {
        const auto s = static_cast<std::size_t>(state_id(sname, "`actions`"));
        if (!acts.is_object() || acts.empty())
            throw ModelError("action set of `" + sname + "` must be a non-empty object");
        for (const auto& [aname, d] : acts.items()) {
            if (!d.is_object() || d.empty())
                throw ModelError("distribution (" + sname + "," + aname +
                                 ") must be a non-empty object");
            std::vector<std::pair<int, double>> dist;
            double sum = 0.0;
            for (const auto& [tname, pv] : d.items()) {
                if (!pv.is_number())
                    throw ModelError("probability in (" + sname + "," + aname +
                                     ") must be a number");
                const double p = pv.get<double>();
                if (!std::isfinite(p) || p <= 0.0 || p > 1.0)
                    throw ModelError("distribution (" + sname + "," + aname +
                                     ") has probability outside (0,1] for `" + tname + "`");
                dist.emplace_back(state_id(tname, ("distribution (" + sname + "," + aname + ")").c_str()), p);
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-9) {
                std::ostringstream os;
                os.precision(12);
                os << "distribution (" << sname << "," << aname << ") sums to " << sum;
                throw ModelError(os.str());
            }
            m.action_names[s].push_back(aname);
            m.dist[s].push_back(std::move(dist));
        }
    }
    return m;
}

std::string serialize_model(const Mdp& m) {
    json doc;
    doc["states"] = m.states;
    doc["initial"] = m.states[static_cast<std::size_t>(m.initial)];
    json target = json::array();
    for (int t : m.target_ids()) target.push_back(m.states[static_cast<std::size_t>(t)]);
    doc["target"] = std::move(target);
    json actions = json::object();
    for (int s = 0; s < m.num_states(); ++s) {
        const auto si = static_cast<std::size_t>(s);
        if (m.action_names[si].empty()) continue;
        json acts = json::object();
        for (std::size_t a = 0; a < m.action_names[si].size(); ++a) {
            json d = json::object();
            for (const auto& [succ, p] : m.dist[si][a])
                d[m.states[static_cast<std::size_t>(succ)]] = p;
            acts[m.action_names[si][a]] = std::move(d);
        }
        actions[m.states[si]] = std::move(acts);
    }
    doc["actions"] = std::move(actions);
    return doc.dump(2) + "\n";
}

SupportMdp support_view(const Mdp& m) {
    SupportMdp g;
    g.states = m.states;
    g.initial = m.initial;
    g.is_target = m.is_target;
    g.action_names = m.action_names;
    g.succ.resize(static_cast<std::size_t>(m.num_states()));
    for (int s = 0; s < m.num_states(); ++s) {
        const auto si = static_cast<std::size_t>(s);
        g.succ[si].resize(m.dist[si].size());
        for (std::size_t a = 0; a < m.dist[si].size(); ++a) {
            for (const auto& [w, p] : m.dist[si][a]) g.succ[si][a].push_back(w);
            std::sort(g.succ[si][a].begin(), g.succ[si][a].end());
        }
    }
    return g;
}

std::vector<std::vector<std::vector<int>>> support_adjacency(const SupportMdp& g) {
    std::vector<std::vector<std::vector<int>>> adj(static_cast<std::size_t>(g.num_states()));
    for (int s = 0; s < g.num_states(); ++s) {
        const auto si = static_cast<std::size_t>(s);
        if (g.succ[si].empty()) adj[si].push_back({s});  // absorbing self-loop
        else adj[si] = g.succ[si];
    }
    return adj;
}

std::vector<double> exact_reachability_value(const Mdp& m, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    const auto n = static_cast<std::size_t>(m.num_states());
    const SupportMdp g = support_view(m);
    const auto adj = support_adjacency(g);
    const auto v0 = smc::graph::value0_states(adj, m.is_target);
    const auto v1 = smc::graph::value1_states(adj, m.is_target);
    const auto mecs = smc::graph::mec_decomposition(adj);

    // Two-sided value iteration. To keep the upper iteration convergent we
    // synchronize values across each MEC: all members of a MEC share one value
    // (max over the members' leaving actions), which removes value stalls in
    // end components.
    std::vector<double> lo(n, 0.0), hi(n, 1.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (v1[s]) lo[s] = hi[s] = 1.0;
        if (v0[s]) lo[s] = hi[s] = 0.0;
    }
    const auto backup = [&](const std::vector<double>& v, std::size_t s) {
        if (v1[s] || v0[s]) return v[s];
        const int mec = mecs.mec_of[s];
        double best = 0.0;
        bool any = false;
        // For MEC members, maximize over all leaving actions of the whole MEC;
        // internal actions cannot improve reachability.
        const auto consider = [&](std::size_t st, std::size_t a) {
            const int mst = mecs.mec_of[st];
            if (mst >= 0) {
                bool internal = true;
                for (const auto& [w, p] : m.dist[st][a]) {
                    (void)p;
                    if (mecs.mec_of[static_cast<std::size_t>(w)] != mst) internal = false;
                }
                if (internal) return;
            }
            double val = 0.0;
            for (const auto& [w, p] : m.dist[st][a]) val += p * v[static_cast<std::size_t>(w)];
            best = std::max(best, val);
            any = true;
        };
        if (mec >= 0) {
            for (int member : mecs.mecs[static_cast<std::size_t>(mec)].states)
                for (std::size_t a = 0; a < m.dist[static_cast<std::size_t>(member)].size(); ++a)
                    consider(static_cast<std::size_t>(member), a);
        } else {
            for (std::size_t a = 0; a < m.dist[s].size(); ++a) consider(s, a);
        }
        return any ? best : 0.0;
    };

    for (long iter = 0; iter < 10'000'000; ++iter) {
        double gap = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            lo[s] = std::max(lo[s], backup(lo, s));
            hi[s] = std::min(hi[s], backup(hi, s));
            gap = std::max(gap, hi[s] - lo[s]);
        }
        if (gap < tol) break;
    }
    std::vector<double> out(n);
    for (std::size_t s = 0; s < n; ++s) out[s] = 0.5 * (lo[s] + hi[s]);
    return out;
}

}  // namespace smc::model
