#include <doctest.h>

#include <algorithm>

#include "diffwarn/abm.hpp"
#include "diffwarn/netgen.hpp"
#include "oracles.hpp"

using namespace diffwarn;
using namespace diffwarn::abm;
using diffwarn::net::Graph;
using diffwarn::net::Vertex;

namespace {

Graph complete_graph(std::size_t n) {
    std::vector<net::Edge> edges;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) edges.push_back({u, v});
    return Graph(n, std::move(edges));
}

}  // namespace

TEST_SUITE("abm") {

TEST_CASE("certain spontaneous exit empties the member pool in one step") {
    const Graph g = complete_graph(10);
    Params p{0.0, 0.0, 1.0};
    State st = make_state(10, {0, 1, 2});
    RngStream rng(1);
    st = step(st, g, p, rng);
    CHECK(st.count(AgentState::Member) == 0);
    CHECK(st.count(AgentState::Ex) == 3);
    CHECK(st.count(AgentState::Potential) == 7);
}

TEST_CASE("certain recruitment converts an exposed potential in one step") {
    const Graph g(2, {{0, 1}});
    Params p{1.0, 0.0, 0.0};
    State st = make_state(2, {0});
    RngStream rng(1);
    st = step(st, g, p, rng);
    CHECK(st.labels[1] == AgentState::Member);
}

TEST_CASE("population is conserved and ex is absorbing") {
    const Graph g = oracles::random_graph(60, 0.1, 8);
    Params p{0.4, 0.1, 0.15};
    State st = make_state(60, {0, 1, 2, 3, 4});
    RngStream rng(11);
    std::size_t prev_ex = 0;
    for (int k = 0; k < 40; ++k) {
        st = step(st, g, p, rng);
        CHECK(st.count(AgentState::Potential) + st.count(AgentState::Member) +
                  st.count(AgentState::Ex) ==
              60);
        const std::size_t ex = st.count(AgentState::Ex);
        CHECK(ex >= prev_ex);
        prev_ex = ex;
    }
}

TEST_CASE("membership is monotone when exits are impossible") {
    const Graph g = oracles::random_graph(50, 0.15, 21);
    Params p{0.3, 0.0, 0.0};
    State st = make_state(50, {7});
    RngStream rng(5);
    std::size_t prev = 1;
    for (int k = 0; k < 30; ++k) {
        st = step(st, g, p, rng);
        const std::size_t m = st.count(AgentState::Member);
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("steps are deterministic given the rng stream") {
    const Graph g = oracles::random_graph(40, 0.2, 2);
    Params p{0.35, 0.05, 0.1};
    State a = make_state(40, {0, 1});
    State b = make_state(40, {0, 1});
    RngStream ra(123), rb(123);
    for (int k = 0; k < 10; ++k) {
        a = step(a, g, p, ra);
        b = step(b, g, p, rb);
    }
    CHECK(a.labels == b.labels);
}

TEST_CASE("cascade trial contract") {
    const Graph g = net::generate_planted_partition(40, 0.6, 0.0, 77);
    Params p{1.0, 0.0, 0.0};
    std::vector<Vertex> targets;
    for (Vertex v = 0; v < 20; ++v) targets.push_back(v);

    // no cross edges: the movement cannot reach the left half
    CHECK_FALSE(run_cascade_trial(g, p, {25, 26, 27}, targets, 400, 1));

    // overlapping seed/target sets are rejected
    CHECK_THROWS_AS(run_cascade_trial(g, p, {3}, targets, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_cascade_trial(g, p, {}, targets, 10, 1), std::invalid_argument);

    // monotone flood fill on a connected graph always reaches the target
    const Graph conn = oracles::random_graph(30, 0.3, 5);
    std::vector<Vertex> t2 = {0};
    bool reached = run_cascade_trial(conn, p, {29}, t2, 1000, 9);
    CHECK(reached);
}

TEST_CASE("cascade probability endpoints and determinism") {
    CascadeConfig config;
    config.n = 60;
    config.p_i = 0.5;
    config.ratio_grid = {1e9};  // effectively p_e = 0
    config.realizations_per_ratio = 3;
    config.trials_per_realization = 4;
    config.seeds_per_trial = 3;
    config.params = {0.8, 0.0, 0.2};
    const auto res = cascade_probability(config, 31);
    REQUIRE(res.size() == 1);
    CHECK(res[0].probability_estimate == 0.0);
    CHECK(res[0].runs == 12);

    config.ratio_grid = {5.0, 50.0};
    const auto a = cascade_probability(config, 31);
    const auto b = cascade_probability(config, 31);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].probability_estimate == b[i].probability_estimate);
        CHECK(a[i].standard_error ==
              doctest::Approx(std::sqrt(a[i].probability_estimate *
                                        (1.0 - a[i].probability_estimate) / a[i].runs))
                  .epsilon(1e-12));
    }
}

}  // TEST_SUITE
