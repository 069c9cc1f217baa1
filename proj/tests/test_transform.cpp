#include "doctest.h"
#include "smc/model.hpp"
#include "smc/transform.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace smc::transform;
using smc::model::Mdp;
using smc::model::parse_model;
using smc::model::support_view;
using smc::model::exact_reachability_value;

namespace {

const char* kFig2 = R"({
  "states": ["init", "s1", "s2", "t", "goal", "sink"],
  "initial": "init",
  "target": ["goal"],
  "actions": {
    "init": {"a": {"s1": 0.5, "t": 0.5}},
    "s1": {"a": {"s1": 0.4, "s2": 0.6}},
    "s2": {"a": {"goal": 0.3, "sink": 0.2, "t": 0.5}, "b": {"s1": 1.0}},
    "t": {"a": {"t": 0.6, "goal": 0.4}, "b": {"s1": 0.5, "s2": 0.5}}
  }
})";

TransformOptions only(bool equivalence, bool scc, bool chains) {
    TransformOptions o;
    o.equivalence = equivalence;
    o.scc_fragments = scc;
    o.chains = chains;
    return o;
}

} // namespace

TEST_CASE("no transforms: identity classes") {
    Mdp m = parse_model(kFig2);
    ClassModel cm = build_class_model(support_view(m), only(false, false, false));
    CHECK(cm.live_classes().size() == 6);
    CHECK(cm.goal_class == -1);
    // all 12 transitions remain learnable
    CHECK(cm.live_transition_count() == 12);
}

TEST_CASE("fig2 equivalence merge + collapse leaves two distributions") {
    Mdp m = parse_model(kFig2);
    ClassModel cm = build_class_model(support_view(m), only(true, false, false));
    // classes: init, MEC{s1,s2}, GOAL{t,goal}, SINK{sink}
    CHECK(cm.live_classes().size() == 4);
    REQUIRE(cm.goal_class >= 0);
    REQUIRE(cm.sink_class >= 0);
    CHECK(cm.classes[static_cast<std::size_t>(cm.goal_class)].ground_states.size() == 2);
    // remaining learnable transitions: (init,a)->{MEC,GOAL}, (MEC,s2.a)->{GOAL,SINK}
    CHECK(cm.live_transition_count() == 4);
    int dists = 0;
    for (int c : cm.live_classes())
        dists += static_cast<int>(cm.classes[static_cast<std::size_t>(c)].actions.size());
    CHECK(dists == 2);
    // upper action of s1 disappears (it is MEC-internal)
    for (int c : cm.live_classes())
        for (int aid : cm.classes[static_cast<std::size_t>(c)].actions)
            CHECK(cm.actions[static_cast<std::size_t>(aid)].name != "s1.a");
}

TEST_CASE("fig2 full pipeline collapses to one macro distribution") {
    Mdp m = parse_model(kFig2);
    ClassModel cm = build_class_model(support_view(m), only(true, true, true));
    // the MEC class is a chain (single predecessor init), so it gets eliminated
    const auto& init = cm.classes[static_cast<std::size_t>(cm.initial_class)];
    REQUIRE(init.actions.size() == 1);
    const auto& macro = cm.actions[static_cast<std::size_t>(init.actions[0])];
    CHECK(macro.kind == ActionKind::Macro);
    REQUIRE(macro.succ.size() == 2);
    CHECK(macro.succ[0] == cm.goal_class);
    CHECK(macro.succ[1] == cm.sink_class);
    // exact macro distribution: 0.9 goal / 0.1 sink
    auto dist = exact_action_distribution(m, cm, init.actions[0]);
    REQUIRE(dist.size() == 2);
    CHECK(dist[0].second == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(dist[1].second == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("mec conditional distribution renormalizes") {
    // x's action b leaves the MEC {x} with a partial self-loop
    Mdp m = parse_model(R"({"states":["x","goal","sink"],"initial":"x","target":["goal"],
        "actions":{"x":{"a":{"x":1.0},"b":{"x":0.5,"goal":0.3,"sink":0.2}}}})");
    ClassModel cm = build_class_model(support_view(m), only(true, false, false));
    const auto& init = cm.classes[static_cast<std::size_t>(cm.initial_class)];
    CHECK(cm.classes[static_cast<std::size_t>(cm.initial_class)].kind == ClassKind::Mec);
    REQUIRE(init.actions.size() == 1);  // self-loop action a removed as internal
    auto dist = exact_action_distribution(m, cm, init.actions[0]);
    REQUIRE(dist.size() == 2);
    CHECK(dist[0].second == doctest::Approx(0.6).epsilon(1e-12));  // goal 0.3/0.5
    CHECK(dist[1].second == doctest::Approx(0.4).epsilon(1e-12));  // sink 0.2/0.5
}

TEST_CASE("chain elimination: textbook chain") {
    // t -a-> s -a'-> {x,y}; s has a unique predecessor
    Mdp m = parse_model(R"({"states":["t","s","x","y"],"initial":"t","target":["x"],
        "actions":{"t":{"a":{"s":1.0}},"s":{"ap":{"x":0.3,"y":0.7}}}})");
    ClassModel cm = build_class_model(support_view(m), only(false, false, true));
    const auto& init = cm.classes[static_cast<std::size_t>(cm.initial_class)];
    REQUIRE(init.actions.size() == 1);
    const auto& macro = cm.actions[static_cast<std::size_t>(init.actions[0])];
    CHECK(macro.kind == ActionKind::Macro);
    CHECK(macro.succ.size() == 2);
    auto dist = exact_action_distribution(m, cm, init.actions[0]);
    REQUIRE(dist.size() == 2);
    CHECK(dist[0].second == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(dist[1].second == doctest::Approx(0.7).epsilon(1e-12));
    // 2 learnable transitions instead of 3
    CHECK(cm.live_transition_count() == 2);
}

TEST_CASE("chain with entry keeping outside successors") {
    // t -a-> {s:0.5, z:0.5}; s -a'-> {x:0.3, y:0.7}: macro = {x:.15,y:.35,z:.5}
    Mdp m = parse_model(R"({"states":["t","s","x","y","z"],"initial":"t","target":["x"],
        "actions":{"t":{"a":{"s":0.5,"z":0.5}},"s":{"ap":{"x":0.3,"y":0.7}}}})");
    ClassModel cm = build_class_model(support_view(m), only(false, false, true));
    const auto& init = cm.classes[static_cast<std::size_t>(cm.initial_class)];
    REQUIRE(init.actions.size() == 1);
    auto dist = exact_action_distribution(m, cm, init.actions[0]);
    REQUIRE(dist.size() == 3);
    double px = 0, py = 0, pz = 0;
    for (auto& [w, p] : dist) {
        const auto& name = cm.classes[static_cast<std::size_t>(w)].name;
        if (name == "x") px = p;
        if (name == "y") py = p;
        if (name == "z") pz = p;
    }
    CHECK(px == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(py == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(pz == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("chain not applied to states with two predecessors") {
    Mdp m = parse_model(R"({"states":["i","u","s","x","y"],"initial":"i","target":["x"],
        "actions":{"i":{"a":{"u":0.5,"s":0.5}},"u":{"a":{"s":1.0}},
                   "s":{"a":{"x":0.5,"y":0.5}}}})");
    ClassModel cm = build_class_model(support_view(m), only(false, false, false));
    auto cands = chain_candidates(cm);
    // u has one predecessor (i), s has two (i and u)
    REQUIRE(cands.size() == 1);
    CHECK(cm.classes[static_cast<std::size_t>(cands[0])].name == "u");
}

TEST_CASE("internal loop gives geometric absorption independent of loop count") {
    // s loops on itself with 0.5 and exits 0.25/0.25
    Mdp m = parse_model(R"({"states":["t","s","x","y"],"initial":"t","target":["x"],
        "actions":{"t":{"a":{"s":1.0}},"s":{"ap":{"s":0.5,"x":0.25,"y":0.25}}}})");
    ClassModel cm = build_class_model(support_view(m), only(false, false, true));
    const auto& init = cm.classes[static_cast<std::size_t>(cm.initial_class)];
    REQUIRE(init.actions.size() == 1);
    CHECK(cm.actions[static_cast<std::size_t>(init.actions[0])].kind == ActionKind::Macro);
    auto dist = exact_action_distribution(m, cm, init.actions[0]);
    REQUIRE(dist.size() == 2);
    CHECK(dist[0].second == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(dist[1].second == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("fragment rejects absorbing member (end component)") {
    Mdp m = parse_model(R"({"states":["t","s","x"],"initial":"t","target":["x"],
        "actions":{"t":{"a":{"s":1.0}},"s":{"ap":{"s":1.0}}}})");
    ClassModel cm = build_class_model(support_view(m), only(false, false, false));
    const int s_class = cm.class0[1];
    CHECK(!fragment_ec_free(cm, {s_class}));
    CHECK(chain_candidates(cm).empty());
}

TEST_CASE("scc fragment: two strategies, cheaper than direct") {
    // diamond SCC: e -> s1 <-> s2 (s2 has two actions), exits e1, e2.
    Mdp m = parse_model(R"({
      "states": ["e", "s1", "s2", "e1", "e2"],
      "initial": "e", "target": ["e1"],
      "actions": {
        "e": {"a": {"s1": 1.0}},
        "s1": {"a": {"s2": 0.6, "e1": 0.2, "e2": 0.2}},
        "s2": {"a": {"s1": 0.5, "e1": 0.5}, "b": {"s1": 0.5, "e2": 0.5}}
      }
    })");
    ClassModel cm = build_class_model(support_view(m), only(false, true, false));
    // fragment {s1,s2} applied: 2 strategies from the single entry
    REQUIRE(cm.fragments.size() == 1);
    CHECK(cm.fragments[0].members.size() == 2);
    CHECK(cm.fragments[0].strategies.size() == 2);
    const auto& init = cm.classes[static_cast<std::size_t>(cm.initial_class)];
    CHECK(init.actions.size() == 2);  // one macro per strategy
    // value preserved
    const double exact = exact_reachability_value(m)[0];
    CHECK(exact_transformed_value(m, cm) == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("fragment cost formula on a chain") {
    Mdp m = parse_model(R"({"states":["t","s","x","y"],"initial":"t","target":["x"],
        "actions":{"t":{"a":{"s":1.0}},"s":{"ap":{"x":0.3,"y":0.7}}}})");
    ClassModel cm = build_class_model(support_view(m), only(false, false, false));
    const int s_class = cm.class0[1];
    const auto [q, d] = fragment_cost(cm, {s_class});
    CHECK(q == 2);
    CHECK(d == 2);
}

TEST_CASE("value preservation on random models, each toggle combination") {
    const TransformOptions combos[] = {
        only(true, false, false), only(false, false, true),
        only(false, true, false), only(true, true, true),
    };
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        Mdp m = smc::testing::make_random_mdp(seed);
        const double exact = exact_reachability_value(m, 1e-10)
            [static_cast<std::size_t>(m.initial)];
        for (const auto& opt : combos) {
            ClassModel cm = build_class_model(support_view(m), opt);
            const double tv = exact_transformed_value(m, cm, 1e-10);
            CHECK(std::fabs(tv - exact) <= 2e-6);
        }
    }
}

TEST_CASE("transform report lists applied transforms in order") {
    Mdp m = parse_model(kFig2);
    ClassModel cm = build_class_model(support_view(m), only(true, true, true));
    REQUIRE(cm.report.size() >= 2);
    CHECK(cm.report[0].rfind("value-merge", 0) == 0);
    CHECK(cm.report[1].rfind("mec-collapse", 0) == 0);
    CHECK(cm.report.back().rfind("chain", 0) == 0);
}

TEST_CASE("transforms never increase the learnable transition count") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        Mdp m = smc::testing::make_random_mdp(seed);
        ClassModel base = build_class_model(support_view(m), only(false, false, false));
        ClassModel full = build_class_model(support_view(m), only(true, true, true));
        CHECK(full.live_transition_count() <= base.live_transition_count());
    }
}
