#include "diffwarn/netgen.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace diffwarn::net {

namespace {

// Visits each of `total` candidate pairs independently with probability p,
// using geometric skips so sparse regimes cost O(edges) rather than O(pairs).
template <typename Emit>
void sample_bernoulli_indices(std::uint64_t total, double p, RngStream& rng,
                              Emit&& emit) {
    if (p <= 0.0 || total == 0) return;
    if (p >= 1.0) {
        for (std::uint64_t i = 0; i < total; ++i) emit(i);
        return;
    }
    const double log1mp = std::log1p(-p);
    std::uint64_t i = 0;
    while (true) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        const double skip = std::floor(std::log(u) / log1mp);
        if (skip >= static_cast<double>(total - i)) return;
        i += static_cast<std::uint64_t>(skip);
        emit(i);
        if (++i >= total) return;
    }
}

// pair index -> (u,v) for u<v within a vertex range [base, base+m)
inline Edge unrank_within(std::uint64_t idx, std::uint64_t m, Vertex base) {
    // row-major over u = 0..m-2, v = u+1..m-1
    std::uint64_t u = 0;
    std::uint64_t remaining = m - 1;
    while (idx >= remaining) {
        idx -= remaining;
        ++u;
        --remaining;
    }
    const std::uint64_t v = u + 1 + idx;
    return {static_cast<Vertex>(base + u), static_cast<Vertex>(base + v)};
}

}  // namespace

Graph generate_planted_partition(std::size_t n, double p_i, double p_e,
                                 std::uint64_t seed) {
    if (n % 2 != 0) throw std::invalid_argument("planted partition: n must be even");
    if (p_i < 0.0 || p_i > 1.0 || p_e < 0.0 || p_e > 1.0)
        throw std::invalid_argument("planted partition: probabilities must be in [0,1]");
    if (p_e > p_i)
        throw std::invalid_argument("planted partition: requires p_e <= p_i");

    const std::uint64_t half = n / 2;
    std::vector<Edge> edges;
    RngStream rng_l(derive_seed(seed, 0));
    RngStream rng_r(derive_seed(seed, 1));
    RngStream rng_x(derive_seed(seed, 2));

    const std::uint64_t within_pairs = half * (half - 1) / 2;
    sample_bernoulli_indices(within_pairs, p_i, rng_l, [&](std::uint64_t idx) {
        edges.push_back(unrank_within(idx, half, 0));
    });
    sample_bernoulli_indices(within_pairs, p_i, rng_r, [&](std::uint64_t idx) {
        edges.push_back(unrank_within(idx, half, static_cast<Vertex>(half)));
    });
    sample_bernoulli_indices(half * half, p_e, rng_x, [&](std::uint64_t idx) {
        const Vertex u = static_cast<Vertex>(idx / half);
        const Vertex v = static_cast<Vertex>(half + idx % half);
        edges.emplace_back(u, v);
    });
    return Graph(n, std::move(edges));
}

std::uint32_t sample_truncated_power_law(double exponent, std::uint32_t min_size,
                                         std::uint32_t max_size, RngStream& rng) {
    // inverse CDF over the discrete support [min_size, max_size]
    // weights s^-exponent; cumulative table is small enough to scan on the fly
    // via binary search over a cached normalizer-free cumulative sum.
    // For repeated draws the caller keeps the rng; the per-draw cost is the
    // search only because the table is built once per (exponent,min,max).
    struct Table {
        double exponent;
        std::uint32_t lo, hi;
        std::vector<double> cum;
    };
    thread_local Table table{0.0, 0, 0, {}};
    if (table.exponent != exponent || table.lo != min_size || table.hi != max_size) {
        table = {exponent, min_size, max_size, {}};
        table.cum.resize(max_size - min_size + 1);
        double acc = 0.0;
        for (std::uint32_t s = min_size; s <= max_size; ++s) {
            acc += std::pow(static_cast<double>(s), -exponent);
            table.cum[s - min_size] = acc;
        }
    }
    const double u = rng.uniform() * table.cum.back();
    std::size_t lo = 0, hi = table.cum.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (table.cum[mid] < u)
            lo = mid + 1;
        else
            hi = mid;
    }
    return min_size + static_cast<std::uint32_t>(lo);
}

CommunityGraph generate_community_graph(std::size_t K, double edge_prob,
                                        double size_exponent, std::size_t min_size,
                                        std::uint64_t seed) {
    if (K == 0) throw std::invalid_argument("community graph: K must be >= 1");
    if (size_exponent <= 1.0)
        throw std::invalid_argument("community graph: size exponent must exceed 1");
    if (min_size == 0) throw std::invalid_argument("community graph: min_size must be >= 1");
    if (edge_prob < 0.0 || edge_prob > 1.0)
        throw std::invalid_argument("community graph: edge_prob must be in [0,1]");

    constexpr std::uint32_t kMaxSize = 10000;
    CommunityGraph cg;
    cg.community_count = K;
    RngStream size_rng(derive_seed(seed, 0));
    for (std::size_t c = 0; c < K; ++c)
        cg.sizes.push_back(sample_truncated_power_law(
            size_exponent, static_cast<std::uint32_t>(min_size), kMaxSize, size_rng));

    RngStream edge_rng(derive_seed(seed, 1));
    const std::uint64_t pairs = static_cast<std::uint64_t>(K) * (K - 1) / 2;
    sample_bernoulli_indices(pairs, edge_prob, edge_rng, [&](std::uint64_t idx) {
        cg.meta_edges.push_back(unrank_within(idx, K, 0));
    });
    return cg;
}

std::vector<Vertex> materialized_blocks(const CommunityGraph& cg) {
    std::vector<Vertex> block;
    for (std::size_t c = 0; c < cg.community_count; ++c)
        block.insert(block.end(), cg.sizes[c], static_cast<Vertex>(c));
    return block;
}

Graph materialize_community_graph(const CommunityGraph& cg, double p_in,
                                  double p_cross, std::uint64_t seed) {
    if (p_in < 0.0 || p_in > 1.0 || p_cross < 0.0 || p_cross > 1.0)
        throw std::invalid_argument("materialize: probabilities must be in [0,1]");
    std::vector<Vertex> base(cg.community_count, 0);
    std::uint64_t n = 0;
    for (std::size_t c = 0; c < cg.community_count; ++c) {
        base[c] = static_cast<Vertex>(n);
        n += cg.sizes[c];
    }
    std::vector<Edge> edges;
    for (std::size_t c = 0; c < cg.community_count; ++c) {
        RngStream rng(derive_seed(seed, 0, c));
        const std::uint64_t m = cg.sizes[c];
        sample_bernoulli_indices(m * (m - 1) / 2, p_in, rng, [&](std::uint64_t idx) {
            edges.push_back(unrank_within(idx, m, base[c]));
        });
    }
    for (std::size_t e = 0; e < cg.meta_edges.size(); ++e) {
        const auto [a, b] = cg.meta_edges[e];
        RngStream rng(derive_seed(seed, 1, e));
        const std::uint64_t ma = cg.sizes[a], mb = cg.sizes[b];
        sample_bernoulli_indices(ma * mb, p_cross, rng, [&](std::uint64_t idx) {
            edges.emplace_back(static_cast<Vertex>(base[a] + idx / mb),
                               static_cast<Vertex>(base[b] + idx % mb));
        });
    }
    return Graph(n, std::move(edges));
}

}  // namespace diffwarn::net
