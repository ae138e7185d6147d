#pragma once

#include <cstdint>
#include <vector>

#include "diffwarn/graph.hpp"
#include "diffwarn/rng.hpp"

namespace diffwarn::abm {

enum class AgentState : std::uint8_t { Potential = 0, Member = 1, Ex = 2 };

struct Params {
    double beta_p = 0.0;    // member -> potential conversion, per contact per step
    double delta1_p = 0.0;  // ex -> member conversion, per contact per step
    double delta2_p = 0.0;  // spontaneous member -> ex, per step

    void validate() const;
};

struct State {
    std::vector<AgentState> labels;
    std::uint64_t step_count = 0;

    std::size_t count(AgentState s) const;
};

State make_state(std::size_t vertex_count, const std::vector<net::Vertex>& member_seeds);

// One synchronous step. Every potential member with m member neighbors turns
// member with probability 1-(1-beta')^m; every member with e ex neighbors
// turns ex with probability 1-(1-delta1')^e (1-delta2'). Ex is absorbing.
// Flips are computed against the pre-step state, vertex order is fixed, and
// the rng stream is consumed deterministically.
State step(const State& state, const net::Graph& g, const Params& params,
           RngStream& rng);

// Runs one cascade trial: seeds start as members, everyone else potential.
// True iff any target vertex becomes a member before the membership dies out
// or max_steps elapses.
bool run_cascade_trial(const net::Graph& g, const Params& params,
                       const std::vector<net::Vertex>& seed_vertices,
                       const std::vector<net::Vertex>& target_vertices,
                       std::uint64_t max_steps, std::uint64_t seed);

struct CascadeResult {
    double ratio = 0.0;  // p_i / p_e swept by the experiment
    double probability_estimate = 0.0;
    double standard_error = 0.0;
    std::uint64_t runs = 0;
};

struct CascadeConfig {
    std::size_t n = 2000;            // planted-partition vertices
    double p_i = 0.0;                // 0 => default 40/n (mean within-degree ~20)
    std::vector<double> ratio_grid;  // p_i / p_e values
    std::size_t realizations_per_ratio = 50;
    std::size_t trials_per_realization = 20;
    std::size_t seeds_per_trial = 5;
    std::uint64_t max_steps = 0;  // 0 => 10 * n
    Params params;

    double effective_p_i() const { return p_i > 0.0 ? p_i : 40.0 / static_cast<double>(n); }
    std::uint64_t effective_max_steps() const { return max_steps ? max_steps : 10 * n; }
};

// Planted-partition cascade sweep: for each ratio, builds network
// realizations, seeds random members in the R half and estimates the
// probability that membership ever reaches the L half. Fully determined by
// master_seed; trials are seeded by (ratio, realization, trial) index.
std::vector<CascadeResult> cascade_probability(const CascadeConfig& config,
                                               std::uint64_t master_seed);

// ratio,p_hat,stderr,runs
std::string cascade_csv(const std::vector<CascadeResult>& results);

}  // namespace diffwarn::abm
