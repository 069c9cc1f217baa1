#include "smc/graph.hpp"

#include <algorithm>
#include <cstddef>

namespace smc::graph {

namespace {

// Iterative Tarjan over the flattened successor relation.
struct TarjanState {
    const Adjacency& g;
    std::vector<int> index, lowlink, on_stack;
    std::vector<int> stack;
    std::vector<std::vector<int>> out;
    int next_index = 0;

    explicit TarjanState(const Adjacency& adj)
        : g(adj),
          index(adj.size(), -1),
          lowlink(adj.size(), 0),
          on_stack(adj.size(), 0) {}

    void run(int root) {
        struct Frame {
            int v;
            std::size_t ai, si;  // action / successor cursor
        };
        std::vector<Frame> frames;
        frames.push_back({root, 0, 0});
        visit(root);
        while (!frames.empty()) {
            Frame& f = frames.back();
            const auto v = static_cast<std::size_t>(f.v);
            bool descended = false;
            while (f.ai < g[v].size()) {
                if (f.si >= g[v][f.ai].size()) {
                    ++f.ai;
                    f.si = 0;
                    continue;
                }
                const int w = g[v][f.ai][f.si++];
                if (index[static_cast<std::size_t>(w)] == -1) {
                    visit(w);
                    frames.push_back({w, 0, 0});
                    descended = true;
                    break;
                }
                if (on_stack[static_cast<std::size_t>(w)])
                    lowlink[v] = std::min(lowlink[v], index[static_cast<std::size_t>(w)]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<std::size_t>(w)] = 0;
                    comp.push_back(w);
                } while (w != f.v);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
            const int child = f.v;
            frames.pop_back();
            if (!frames.empty()) {
                const auto p = static_cast<std::size_t>(frames.back().v);
                lowlink[p] = std::min(lowlink[p], lowlink[static_cast<std::size_t>(child)]);
            }
        }
    }

    void visit(int v) {
        const auto vs = static_cast<std::size_t>(v);
        index[vs] = lowlink[vs] = next_index++;
        stack.push_back(v);
        on_stack[vs] = 1;
    }
};

} // namespace

std::vector<std::vector<int>> sccs(const Adjacency& g) {
    TarjanState t(g);
    for (int v = 0; v < static_cast<int>(g.size()); ++v)
        if (t.index[static_cast<std::size_t>(v)] == -1) t.run(v);
    return std::move(t.out);
}

MecDecomposition mec_decomposition(const Adjacency& g) {
    const auto n = g.size();
    // retained[s] = indices of actions still considered internal
    std::vector<std::vector<int>> retained(n);
    for (std::size_t s = 0; s < n; ++s) {
        retained[s].resize(g[s].size());
        for (std::size_t a = 0; a < g[s].size(); ++a) retained[s][a] = static_cast<int>(a);
    }

    bool changed = true;
    std::vector<int> comp_of(n);
    std::vector<std::vector<int>> comps;
    while (changed) {
        changed = false;
        Adjacency sub(n);
        for (std::size_t s = 0; s < n; ++s)
            for (int a : retained[s]) sub[s].push_back(g[s][static_cast<std::size_t>(a)]);
        comps = sccs(sub);
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (int v : comps[c]) comp_of[static_cast<std::size_t>(v)] = static_cast<int>(c);
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<int> keep;
            for (int a : retained[s]) {
                bool inside = true;
                for (int w : g[s][static_cast<std::size_t>(a)])
                    if (comp_of[static_cast<std::size_t>(w)] != comp_of[s]) {
                        inside = false;
                        break;
                    }
                if (inside) keep.push_back(a);
                else changed = true;
            }
            retained[s] = std::move(keep);
        }
    }

    MecDecomposition out;
    out.mec_of.assign(n, -1);
    for (const auto& comp : comps) {
        // A component is a MEC iff every member keeps an internal action.
        bool ok = true;
        for (int v : comp)
            if (retained[static_cast<std::size_t>(v)].empty()) {
                ok = false;
                break;
            }
        if (!ok) continue;
        MecDecomposition::Mec mec;
        mec.states = comp;
        for (int v : comp)
            for (int a : retained[static_cast<std::size_t>(v)])
                mec.state_actions.emplace_back(v, a);
        for (int v : comp) out.mec_of[static_cast<std::size_t>(v)] = static_cast<int>(out.mecs.size());
        out.mecs.push_back(std::move(mec));
    }
    return out;
}

std::vector<bool> value0_states(const Adjacency& g, const std::vector<bool>& target) {
    const auto n = g.size();
    // Backward reachability from the target over all edges.
    std::vector<std::vector<int>> pred(n);
    for (std::size_t s = 0; s < n; ++s)
        for (const auto& dist : g[s])
            for (int w : dist) pred[static_cast<std::size_t>(w)].push_back(static_cast<int>(s));
    std::vector<bool> can_reach(n, false);
    std::vector<int> queue;
    for (std::size_t s = 0; s < n; ++s)
        if (target[s]) {
            can_reach[s] = true;
            queue.push_back(static_cast<int>(s));
        }
    while (!queue.empty()) {
        const int v = queue.back();
        queue.pop_back();
        for (int p : pred[static_cast<std::size_t>(v)])
            if (!can_reach[static_cast<std::size_t>(p)]) {
                can_reach[static_cast<std::size_t>(p)] = true;
                queue.push_back(p);
            }
    }
    std::vector<bool> out(n);
    for (std::size_t s = 0; s < n; ++s) out[s] = !can_reach[s];
    return out;
}

std::vector<bool> value1_states(const Adjacency& g, const std::vector<bool>& target) {
    const auto n = g.size();
    // Classical double fixpoint: outer set X of candidate states, inner set Y of
    // states with an action staying in X and touching Y.
    std::vector<bool> x(n, true);
    while (true) {
        std::vector<bool> y(n, false);
        for (std::size_t s = 0; s < n; ++s) y[s] = target[s];
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t s = 0; s < n; ++s) {
                if (y[s]) continue;
                for (const auto& dist : g[s]) {
                    bool stays = true, touches = false;
                    for (int w : dist) {
                        if (!x[static_cast<std::size_t>(w)]) stays = false;
                        if (y[static_cast<std::size_t>(w)]) touches = true;
                    }
                    if (stays && touches) {
                        y[s] = true;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (y == x) return x;
        x = std::move(y);
    }
}

}  // namespace smc::graph
