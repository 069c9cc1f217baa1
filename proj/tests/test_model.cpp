#include "doctest.h"
#include "smc/model.hpp"

#include <cmath>

using namespace smc::model;

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

} // namespace

TEST_CASE("parse: single self-loop state") {
    Mdp m = parse_model(R"({"states":["s"],"initial":"s","target":[],
        "actions":{"s":{"a":{"s":1.0}}}})");
    CHECK(m.num_states() == 1);
    CHECK(m.action_names[0].size() == 1);
    CHECK(m.dist[0][0].size() == 1);
    CHECK(m.dist[0][0][0].second == doctest::Approx(1.0));
}

TEST_CASE("parse: validation errors") {
    CHECK_THROWS_WITH_AS(
        parse_model(R"({"states":["a","b"],"initial":"a","target":[],
            "actions":{"a":{"x":{"a":0.5,"b":0.49}}}})"),
        doctest::Contains("sums to 0.99"), ModelError);
    CHECK_THROWS_AS(parse_model(R"({"states":["a"],"initial":"a","target":[],
        "actions":{"a":{"x":{"a":0.5,"zzz":0.5}}}})"), ModelError);  // dangling successor
    CHECK_THROWS_AS(parse_model(R"({"states":["a"],"initial":"a","target":[],
        "actions":{"a":{"x":{"a":-0.5}}}})"), ModelError);  // negative probability
    CHECK_THROWS_AS(parse_model(R"({"states":["a"],"initial":"a","target":[],
        "actions":{"a":{}}})"), ModelError);  // empty action set
    CHECK_THROWS_AS(parse_model("{nonsense"), ModelError);  // syntax
    CHECK_THROWS_AS(parse_model(R"({"states":["a"],"initial":"b","target":[],
        "actions":{}})"), ModelError);  // unknown initial
}

TEST_CASE("parse: implicit absorbing states and the 12-transition example") {
    Mdp m = parse_model(kFig2);
    CHECK(m.num_states() == 6);
    CHECK(m.absorbing(m.index.at("goal")));
    CHECK(m.absorbing(m.index.at("sink")));
    CHECK(m.num_transitions() == 12);
    CHECK(m.is_target[static_cast<std::size_t>(m.index.at("goal"))]);
}

TEST_CASE("serialize round-trip") {
    Mdp m = parse_model(kFig2);
    Mdp m2 = parse_model(serialize_model(m));
    CHECK(m2.states == m.states);
    CHECK(m2.initial == m.initial);
    CHECK(m2.is_target == m.is_target);
    CHECK(m2.action_names == m.action_names);
    REQUIRE(m2.dist.size() == m.dist.size());
    for (std::size_t s = 0; s < m.dist.size(); ++s) {
        REQUIRE(m2.dist[s] == m.dist[s]);
    }
    // serialization is stable
    CHECK(serialize_model(m) == serialize_model(m2));
}

TEST_CASE("support view erases probabilities, keeps topology") {
    Mdp m = parse_model(kFig2);
    SupportMdp g = support_view(m);
    const auto s2 = static_cast<std::size_t>(m.index.at("s2"));
    REQUIRE(g.succ[s2].size() == 2);
    CHECK(g.succ[s2][0].size() == 3);  // {goal, sink, t} sorted by id
    CHECK(g.succ[s2][1].size() == 1);
    std::size_t edges = 0;
    for (const auto& per_state : g.succ)
        for (const auto& d : per_state) edges += d.size();
    CHECK(edges == 12);
}

TEST_CASE("exact reachability: basics") {
    // target state has value 1; unreachable sink 0
    Mdp m = parse_model(R"({"states":["s","goal","sink"],"initial":"s","target":["goal"],
        "actions":{"s":{"a":{"goal":0.5,"sink":0.5}}}})");
    auto v = exact_reachability_value(m, 1e-10);
    CHECK(v[static_cast<std::size_t>(m.index.at("goal"))] == doctest::Approx(1.0));
    CHECK(v[static_cast<std::size_t>(m.index.at("sink"))] == doctest::Approx(0.0));
    CHECK(v[static_cast<std::size_t>(m.index.at("s"))] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("exact reachability: fig2 model has value 0.9") {
    Mdp m = parse_model(kFig2);
    auto v = exact_reachability_value(m, 1e-10);
    // t is value-1 (lower action almost surely reaches goal); best from s2 is
    // 0.3 + 0.5*1 = 0.8; s1 inherits 0.8; init = 0.5*0.8 + 0.5*1 = 0.9.
    CHECK(v[static_cast<std::size_t>(m.index.at("t"))] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(v[static_cast<std::size_t>(m.index.at("s1"))] == doctest::Approx(0.8).epsilon(1e-8));
    CHECK(v[static_cast<std::size_t>(m.index.at("s2"))] == doctest::Approx(0.8).epsilon(1e-8));
    CHECK(v[static_cast<std::size_t>(m.index.at("init"))] == doctest::Approx(0.9).epsilon(1e-8));
}

TEST_CASE("exact reachability: monotone under shifting mass toward target") {
    Mdp a = parse_model(R"({"states":["s","goal","sink"],"initial":"s","target":["goal"],
        "actions":{"s":{"a":{"goal":0.3,"sink":0.7}}}})");
    Mdp b = parse_model(R"({"states":["s","goal","sink"],"initial":"s","target":["goal"],
        "actions":{"s":{"a":{"goal":0.6,"sink":0.4}}}})");
    CHECK(exact_reachability_value(a)[0] < exact_reachability_value(b)[0]);
}

TEST_CASE("exact reachability: geometric loop") {
    // s loops with 0.9 and exits to goal with 0.06, sink 0.04: value = 0.06/0.1
    Mdp m = parse_model(R"({"states":["s","goal","sink"],"initial":"s","target":["goal"],
        "actions":{"s":{"a":{"s":0.9,"goal":0.06,"sink":0.04}}}})");
    CHECK(exact_reachability_value(m, 1e-10)[0] == doctest::Approx(0.6).epsilon(1e-8));
}
