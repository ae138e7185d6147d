#pragma once

#include <cstdint>

#include "diffwarn/graph.hpp"
#include "diffwarn/rng.hpp"

namespace diffwarn::net {

// Two equal halves L (vertices 0..n/2-1) and R (n/2..n-1); within-half pairs
// joined independently with probability p_i, cross-half pairs with p_e.
// Deterministic given seed.
Graph generate_planted_partition(std::size_t n, double p_i, double p_e,
                                 std::uint64_t seed);

// K communities on an Erdos-Renyi meta-topology; sizes i.i.d. discrete
// power-law with the given exponent, floored at min_size and truncated at 1e4.
CommunityGraph generate_community_graph(std::size_t K, double edge_prob,
                                        double size_exponent, std::size_t min_size,
                                        std::uint64_t seed);

// One draw from the truncated discrete power law used above (exposed for
// distribution tests).
std::uint32_t sample_truncated_power_law(double exponent, std::uint32_t min_size,
                                         std::uint32_t max_size, RngStream& rng);

// Expands a community graph to a vertex-level graph: each community becomes a
// block of `sizes[c]` vertices wired internally with probability p_in; each
// meta-edge gets cross-block pairs with probability p_cross.
Graph materialize_community_graph(const CommunityGraph& cg, double p_in,
                                  double p_cross, std::uint64_t seed);

// block index of every vertex of a materialized graph, in construction order
std::vector<Vertex> materialized_blocks(const CommunityGraph& cg);

}  // namespace diffwarn::net
