#pragma once

#include "diffwarn/graph.hpp"

namespace diffwarn::net {

// Iterative degree peeling. Isolated vertices land in shell 0; for any graph
// with at least one edge the k_max-shell is non-empty.
KShellDecomposition k_shell_decomposition(const Graph& g);

}  // namespace diffwarn::net
