#pragma once

#include "diffwarn/graph.hpp"

namespace diffwarn::net {

// Newman modularity Q = (1/2m) sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j).
// Rejects edgeless graphs (m = 0) and assignments that do not cover all
// vertices.
double modularity(const Graph& g, const std::vector<Vertex>& assignment);

// Recursive spectral bisection on the leading eigenvector of the modularity
// matrix (power iteration), each split polished by Kernighan-Lin-style single
// vertex moves. Connected components are partitioned independently. Recursion
// stops when the best available split improves Q by less than min_gain.
CommunityPartition partition_communities(const Graph& g, double min_gain = 1e-6);

}  // namespace diffwarn::net
