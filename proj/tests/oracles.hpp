#pragma once

// Independent brute-force oracles used by the unit and acceptance suites.
// Everything here is deliberately naive and kept free of the library's
// algorithmic code paths, so it can stand as a second route.

#include <algorithm>
#include <cmath>
#include <vector>

#include "diffwarn/graph.hpp"
#include "diffwarn/rng.hpp"

namespace oracles {

// Direct double-sum evaluation of Q = (1/2m) sum_ij (A_ij - k_i k_j/2m) delta.
inline double modularity_direct(const diffwarn::net::Graph& g,
                                const std::vector<diffwarn::net::Vertex>& assignment) {
    const std::size_t n = g.vertex_count();
    const double two_m = 2.0 * static_cast<double>(g.edge_count());
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (const auto& [u, v] : g.edges()) adj[u][v] = adj[v][u] = 1;
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (assignment[i] != assignment[j]) continue;
            const double a = adj[i][j] ? 1.0 : 0.0;
            q += a - static_cast<double>(g.degree(i)) *
                         static_cast<double>(g.degree(j)) / two_m;
        }
    return q / two_m;
}

// Exhaustive search over all set partitions (restricted growth strings) with
// incremental community aggregates. Feasible to n = 12.
class BestPartitionSearch {
  public:
    explicit BestPartitionSearch(const diffwarn::net::Graph& g) : g_(g) {
        const std::size_t n = g.vertex_count();
        assignment_.assign(n, 0);
        best_assignment_.assign(n, 0);
        intra_.assign(n, 0.0);
        degsum_.assign(n, 0.0);
        m_ = static_cast<double>(g.edge_count());
    }

    double run() {
        best_q_ = -2.0;
        place(0, 0);
        return best_q_;
    }

    const std::vector<diffwarn::net::Vertex>& best_assignment() const {
        return best_assignment_;
    }

  private:
    void place(std::size_t v, std::size_t used) {
        if (v == g_.vertex_count()) {
            if (q_ > best_q_) {
                best_q_ = q_;
                best_assignment_ = assignment_;
            }
            return;
        }
        const double kv = static_cast<double>(g_.degree(static_cast<diffwarn::net::Vertex>(v)));
        for (std::size_t c = 0; c <= used && c < g_.vertex_count(); ++c) {
            double nbrs_in_c = 0.0;
            for (auto u : g_.neighbors(static_cast<diffwarn::net::Vertex>(v)))
                if (u < v && assignment_[u] == c) nbrs_in_c += 1.0;
            const double old_term = term(c);
            intra_[c] += nbrs_in_c;
            degsum_[c] += kv;
            const double delta = term(c) - old_term;
            q_ += delta;
            assignment_[v] = static_cast<diffwarn::net::Vertex>(c);
            place(v + 1, std::max(used, c + 1));
            q_ -= delta;
            intra_[c] -= nbrs_in_c;
            degsum_[c] -= kv;
        }
    }

    double term(std::size_t c) const {
        const double frac = degsum_[c] / (2.0 * m_);
        return intra_[c] / m_ - frac * frac;
    }

    const diffwarn::net::Graph& g_;
    std::vector<diffwarn::net::Vertex> assignment_, best_assignment_;
    std::vector<double> intra_, degsum_;
    double m_ = 0.0;
    double q_ = 0.0;
    double best_q_ = -2.0;
};

// Naive k-shell peel: repeatedly delete vertices of degree <= k.
inline std::vector<diffwarn::net::Vertex> kshell_naive(const diffwarn::net::Graph& g) {
    const std::size_t n = g.vertex_count();
    std::vector<std::size_t> deg(n);
    for (diffwarn::net::Vertex v = 0; v < n; ++v) deg[v] = g.degree(v);
    std::vector<char> removed(n, 0);
    std::vector<diffwarn::net::Vertex> shell(n, 0);
    std::size_t remaining = n;
    std::size_t k = 0;
    while (remaining > 0) {
        bool peeled_any = true;
        while (peeled_any) {
            peeled_any = false;
            for (diffwarn::net::Vertex v = 0; v < n; ++v) {
                if (removed[v] || deg[v] > k) continue;
                removed[v] = 1;
                shell[v] = static_cast<diffwarn::net::Vertex>(k);
                --remaining;
                peeled_any = true;
                for (auto u : g.neighbors(v))
                    if (!removed[u]) --deg[u];
            }
        }
        ++k;
    }
    return shell;
}

// Erdos-Renyi helper for randomized comparisons.
inline diffwarn::net::Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
    diffwarn::RngStream rng(seed);
    std::vector<diffwarn::net::Edge> edges;
    for (std::uint32_t u = 0; u < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) edges.push_back({u, v});
    return diffwarn::net::Graph(n, std::move(edges));
}

}  // namespace oracles
