#include "diffwarn/kshell.hpp"

#include <algorithm>

namespace diffwarn::net {

// Batagelj-Zaversnik bucket peel, O(n + m).
KShellDecomposition k_shell_decomposition(const Graph& g) {
    const std::size_t n = g.vertex_count();
    KShellDecomposition out;
    out.shell_index.assign(n, 0);
    if (n == 0) return out;

    std::vector<std::size_t> deg(n);
    std::size_t max_deg = 0;
    for (Vertex v = 0; v < n; ++v) {
        deg[v] = g.degree(v);
        max_deg = std::max(max_deg, deg[v]);
    }

    // vertices sorted by degree, with bucket starts and positions
    std::vector<std::size_t> bucket_start(max_deg + 2, 0);
    for (Vertex v = 0; v < n; ++v) ++bucket_start[deg[v] + 1];
    for (std::size_t d = 1; d < bucket_start.size(); ++d)
        bucket_start[d] += bucket_start[d - 1];
    std::vector<Vertex> order(n);
    std::vector<std::size_t> pos(n);
    {
        std::vector<std::size_t> cursor(bucket_start.begin(), bucket_start.end() - 1);
        for (Vertex v = 0; v < n; ++v) {
            pos[v] = cursor[deg[v]]++;
            order[pos[v]] = v;
        }
    }
    std::vector<std::size_t> bin(max_deg + 1);
    for (std::size_t d = 0; d <= max_deg; ++d) bin[d] = bucket_start[d];

    std::vector<std::size_t> cur(deg);
    for (std::size_t i = 0; i < n; ++i) {
        const Vertex v = order[i];
        out.shell_index[v] = static_cast<Vertex>(cur[v]);
        for (Vertex u : g.neighbors(v)) {
            if (cur[u] > cur[v]) {
                // move u to the front of its bucket, then shrink its degree
                const std::size_t du = cur[u];
                const std::size_t pu = pos[u];
                const std::size_t pw = bin[du];
                const Vertex w = order[pw];
                if (u != w) {
                    std::swap(order[pu], order[pw]);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                ++bin[du];
                --cur[u];
            }
        }
    }
    out.k_max = 0;
    for (Vertex v = 0; v < n; ++v) out.k_max = std::max(out.k_max, out.shell_index[v]);
    return out;
}

}  // namespace diffwarn::net
