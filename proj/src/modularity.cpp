#include "diffwarn/modularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace diffwarn::net {

double modularity(const Graph& g, const std::vector<Vertex>& assignment) {
    const std::size_t n = g.vertex_count();
    if (assignment.size() != n)
        throw std::invalid_argument("modularity: assignment does not cover all vertices");
    const double m = static_cast<double>(g.edge_count());
    if (m == 0.0) throw std::invalid_argument("modularity: graph has no edges");

    Vertex c_max = 0;
    for (Vertex c : assignment) c_max = std::max(c_max, c);
    std::vector<double> intra_edges(c_max + 1, 0.0);
    std::vector<double> degree_sum(c_max + 1, 0.0);
    for (const auto& [u, v] : g.edges())
        if (assignment[u] == assignment[v]) intra_edges[assignment[u]] += 1.0;
    for (Vertex v = 0; v < n; ++v)
        degree_sum[assignment[v]] += static_cast<double>(g.degree(v));

    double q = 0.0;
    for (std::size_t c = 0; c <= c_max; ++c) {
        const double frac = degree_sum[c] / (2.0 * m);
        q += intra_edges[c] / m - frac * frac;
    }
    return q;
}

namespace {

// Working context for bisecting one vertex group against the full graph's
// modularity matrix. Local j runs over group members; all degree terms use
// full-graph degrees, per the generalized modularity matrix
//   B(g)_ij = B_ij - delta_ij * sum_{k in g} B_ik.
struct GroupContext {
    const Graph& g;
    double two_m;
    std::vector<Vertex> members;      // global vertex ids
    std::vector<std::int32_t> local;  // global -> local index, -1 outside
    std::vector<double> deg;          // full-graph degree per member
    std::vector<double> row_sum;      // d_i = sum_{k in g} B_ik
    double group_degree = 0.0;        // K_g

    GroupContext(const Graph& graph, std::vector<Vertex> mem,
                 std::vector<std::int32_t>& local_buf)
        : g(graph),
          two_m(2.0 * static_cast<double>(graph.edge_count())),
          members(std::move(mem)),
          local(local_buf) {
        for (std::size_t i = 0; i < members.size(); ++i)
            local[members[i]] = static_cast<std::int32_t>(i);
        deg.resize(members.size());
        row_sum.resize(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            deg[i] = static_cast<double>(g.degree(members[i]));
            group_degree += deg[i];
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            double indeg = 0.0;
            for (Vertex u : g.neighbors(members[i]))
                if (local[u] >= 0) indeg += 1.0;
            row_sum[i] = indeg - deg[i] * group_degree / two_m;
        }
    }

    ~GroupContext() {
        for (Vertex v : members) local[v] = -1;
    }

    std::size_t size() const { return members.size(); }

    // y = B(g) x
    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        double kx = 0.0;
        for (std::size_t i = 0; i < size(); ++i) kx += deg[i] * x[i];
        for (std::size_t i = 0; i < size(); ++i) {
            double ax = 0.0;
            for (Vertex u : g.neighbors(members[i])) {
                const std::int32_t j = local[u];
                if (j >= 0) ax += x[j];
            }
            y[i] = ax - deg[i] * kx / two_m - row_sum[i] * x[i];
        }
    }

    double rayleigh(const std::vector<double>& x) const {
        std::vector<double> y(size());
        multiply(x, y);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            num += x[i] * y[i];
            den += x[i] * x[i];
        }
        return den > 0.0 ? num / den : 0.0;
    }
};

constexpr double kPowerTol = 1e-10;
constexpr int kPowerMaxIter = 10000;

// Power iteration for the dominant eigenpair of B(g) + shift*I.
// Returns the Rayleigh quotient of B(g) itself at the final vector.
double power_iterate(const GroupContext& ctx, double shift, std::vector<double>& v) {
    const std::size_t n = ctx.size();
    std::vector<double> w(n);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    for (int iter = 0; iter < kPowerMaxIter; ++iter) {
        ctx.multiply(v, w);
        if (shift != 0.0)
            for (std::size_t i = 0; i < n; ++i) w[i] += shift * v[i];
        norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) break;  // v is in the null space; keep it
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] /= norm;
            delta = std::max(delta, std::abs(w[i] - v[i]));
        }
        v.swap(w);
        if (delta < kPowerTol) break;
    }
    return ctx.rayleigh(v);
}

// Leading (most positive) eigenvector of B(g). Two-phase: a first run finds
// the dominant-magnitude eigenvalue; if it is negative, a second run on the
// spectrum shifted by its magnitude converges to the most positive one.
std::vector<double> leading_eigenvector(const GroupContext& ctx, double& eigenvalue) {
    const std::size_t n = ctx.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + static_cast<double>(i % 7);
    double lambda = power_iterate(ctx, 0.0, v);
    if (lambda < 0.0) {
        for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + static_cast<double>(i % 7);
        lambda = power_iterate(ctx, -lambda, v);
    }
    eigenvalue = lambda;
    return v;
}

// One sided split of a group described by signs s in {-1,+1}.
// delta-Q of accepting it is s^T B(g) s / (4m), measured against the group
// staying whole (s all-ones gives 0 because B(g) rows sum to zero).
struct Bisection {
    std::vector<double> sign;
    double delta_q = 0.0;
};

// Kernighan-Lin style polishing: repeatedly sweep, moving each vertex at most
// once per sweep in best-gain-first order (ties: lowest vertex id), then roll
// back to the best prefix. Gains use the identity
//   flip(i): delta(s^T B s) = -4 s_i [ (Bs)_i - B_ii s_i ].
void refine_split(const GroupContext& ctx, Bisection& split) {
    const std::size_t n = ctx.size();
    const double four_m = 2.0 * ctx.two_m;
    std::vector<double> bs(n);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = -ctx.deg[i] * ctx.deg[i] / ctx.two_m - ctx.row_sum[i];

    while (true) {
        ctx.multiply(split.sign, bs);
        std::vector<char> moved(n, 0);
        std::vector<double> s = split.sign;
        std::vector<std::size_t> sequence;
        double running = 0.0;
        double best_running = 0.0;
        std::size_t best_len = 0;
        for (std::size_t step = 0; step < n; ++step) {
            double best_gain = -std::numeric_limits<double>::infinity();
            std::size_t best_i = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (moved[i]) continue;
                const double gain = -4.0 * s[i] * (bs[i] - diag[i] * s[i]) / four_m;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_i = i;
                }
            }
            if (best_i == n) break;
            moved[best_i] = 1;
            sequence.push_back(best_i);
            running += best_gain;
            // apply flip and update Bs for every row
            const double old_s = s[best_i];
            s[best_i] = -old_s;
            const double coef = -2.0 * old_s;
            for (Vertex u : ctx.g.neighbors(ctx.members[best_i])) {
                const std::int32_t j = ctx.local[u];
                if (j >= 0) bs[j] += coef;
            }
            const double ki = ctx.deg[best_i];
            for (std::size_t j = 0; j < n; ++j) bs[j] += -coef * ctx.deg[j] * ki / ctx.two_m;
            bs[best_i] += -coef * ctx.row_sum[best_i];
            if (running > best_running + 1e-14) {
                best_running = running;
                best_len = sequence.size();
            }
        }
        if (best_len == 0) break;
        for (std::size_t t = 0; t < best_len; ++t)
            split.sign[sequence[t]] = -split.sign[sequence[t]];
        split.delta_q += best_running;
    }
}

double split_delta_q(const GroupContext& ctx, const std::vector<double>& sign) {
    std::vector<double> bs(ctx.size());
    ctx.multiply(sign, bs);
    double sbs = 0.0;
    for (std::size_t i = 0; i < ctx.size(); ++i) sbs += sign[i] * bs[i];
    return sbs / (2.0 * ctx.two_m);
}

// Refined candidate cuts of one group, best first, deduplicated up to a
// global sign flip. The eigen split is the primary candidate; deterministic
// KL restarts and (on tiny groups) the exact 2-way cut cover the local
// optima it misses.
std::vector<Bisection> propose_splits(const GroupContext& ctx) {
    const std::size_t n = ctx.size();

    double eigenvalue = 0.0;
    const std::vector<double> v = leading_eigenvector(ctx, eigenvalue);

    std::vector<std::vector<double>> starts;
    if (eigenvalue > 0.0) {
        std::vector<double> signs(n);
        for (std::size_t i = 0; i < n; ++i) signs[i] = v[i] >= 0.0 ? 1.0 : -1.0;
        starts.push_back(std::move(signs));

        // median-balanced variant of the same eigenvector
        std::vector<double> sorted(v);
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[n / 2];
        std::vector<double> balanced(n);
        for (std::size_t i = 0; i < n; ++i) balanced[i] = v[i] >= median ? 1.0 : -1.0;
        starts.push_back(std::move(balanced));
    }
    starts.push_back(std::vector<double>(n, 1.0));
    {
        std::vector<double> parity(n);
        for (std::size_t i = 0; i < n; ++i) parity[i] = (i % 2 == 0) ? 1.0 : -1.0;
        starts.push_back(std::move(parity));
    }

    std::vector<Bisection> candidates;
    auto add_candidate = [&](Bisection candidate) {
        auto flipped = candidate.sign;
        for (double& s : flipped) s = -s;
        for (const auto& seen : candidates)
            if (seen.sign == candidate.sign || seen.sign == flipped) return;
        candidates.push_back(std::move(candidate));
    };

    for (auto& start : starts) {
        Bisection candidate;
        candidate.sign = std::move(start);
        candidate.delta_q = split_delta_q(ctx, candidate.sign);
        refine_split(ctx, candidate);
        add_candidate(std::move(candidate));
    }

    // Tiny groups afford the exact top 2-way cuts. These stay unrefined:
    // KL polishing would collapse them onto the dominant cut, and their
    // value to the caller is exactly that they are different first cuts.
    if (n >= 2 && n <= 14) {
        std::vector<double> sign(n, 1.0);
        std::vector<Bisection> exact(8);
        const std::size_t masks = std::size_t{1} << (n - 1);
        for (std::size_t mask = 1; mask < masks; ++mask) {
            for (std::size_t i = 0; i + 1 < n; ++i)
                sign[i + 1] = (mask >> i) & 1 ? -1.0 : 1.0;
            const double dq = split_delta_q(ctx, sign);
            for (std::size_t slot = 0; slot < exact.size(); ++slot) {
                if (dq <= exact[slot].delta_q) continue;
                for (std::size_t k = exact.size() - 1; k > slot; --k)
                    exact[k] = std::move(exact[k - 1]);
                exact[slot] = Bisection{sign, dq};
                break;
            }
        }
        for (auto& cut : exact)
            if (!cut.sign.empty() && cut.delta_q > 0.0) add_candidate(std::move(cut));
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Bisection& a, const Bisection& b) {
                         return a.delta_q > b.delta_q;
                     });
    return candidates;
}

// Modularity contribution of a set of disjoint communities (additive form).
double groups_score(const Graph& g, const std::vector<std::vector<Vertex>>& groups,
                    std::vector<std::int32_t>& local_buf) {
    const double m = static_cast<double>(g.edge_count());
    double q = 0.0;
    for (const auto& group : groups) {
        for (std::size_t i = 0; i < group.size(); ++i)
            local_buf[group[i]] = static_cast<std::int32_t>(i);
        double intra = 0.0, degsum = 0.0;
        for (Vertex v : group) {
            degsum += static_cast<double>(g.degree(v));
            for (Vertex u : g.neighbors(v))
                if (local_buf[u] >= 0 && u > v) intra += 1.0;
        }
        for (Vertex v : group) local_buf[v] = -1;
        const double frac = degsum / (2.0 * m);
        q += intra / m - frac * frac;
    }
    return q;
}

// branch_width > 1 explores the runner-up first cuts as well and keeps the
// decomposition with the best total score; below the first level the
// recursion is greedy.
void bisect_recursive(const Graph& g, std::vector<Vertex> group, double min_gain,
                      std::vector<std::int32_t>& local_buf,
                      std::vector<std::vector<Vertex>>& out,
                      std::size_t branch_width) {
    if (group.size() <= 1) {
        out.push_back(std::move(group));
        return;
    }
    std::vector<Bisection> splits;
    std::vector<Vertex> members;
    {
        GroupContext ctx(g, std::move(group), local_buf);
        splits = propose_splits(ctx);
        members = ctx.members;
    }
    while (!splits.empty() && splits.back().delta_q <= min_gain) splits.pop_back();
    if (splits.empty()) {
        out.push_back(std::move(members));
        return;
    }
    if (splits.size() > branch_width) splits.resize(branch_width);

    std::vector<std::vector<Vertex>> best_groups;
    double best_score = 0.0;
    bool have_best = false;
    for (const auto& split : splits) {
        std::vector<Vertex> side_a, side_b;
        for (std::size_t i = 0; i < members.size(); ++i)
            (split.sign[i] > 0.0 ? side_a : side_b).push_back(members[i]);
        if (side_a.empty() || side_b.empty()) continue;
        const std::size_t child_width = branch_width > 2 ? 2 : 1;
        std::vector<std::vector<Vertex>> groups;
        bisect_recursive(g, std::move(side_a), min_gain, local_buf, groups, child_width);
        bisect_recursive(g, std::move(side_b), min_gain, local_buf, groups, child_width);
        if (splits.size() == 1) {
            out.insert(out.end(), std::make_move_iterator(groups.begin()),
                       std::make_move_iterator(groups.end()));
            return;
        }
        const double score = groups_score(g, groups, local_buf);
        if (!have_best || score > best_score) {
            best_score = score;
            best_groups = std::move(groups);
            have_best = true;
        }
    }
    if (!have_best) {
        out.push_back(std::move(members));
        return;
    }
    out.insert(out.end(), std::make_move_iterator(best_groups.begin()),
               std::make_move_iterator(best_groups.end()));
}

// Multiway Kernighan-Lin over vertex reassignments. Each pass moves every
// vertex at most once to its best target (existing communities plus one fresh
// slot), accepting locally negative moves, then rolls back to the best
// prefix. Ties break toward the lowest vertex, then the lowest target index.
class MultiwayRefiner {
  public:
    MultiwayRefiner(const Graph& g, std::vector<Vertex>& assignment)
        : g_(g), assignment_(assignment), m_(static_cast<double>(g.edge_count())) {}

    void run(std::size_t max_passes = 50) {
        while (max_passes-- > 0 && pass()) {
        }
    }

  private:
    double term(double e, double d) const {
        const double frac = d / (2.0 * m_);
        return e / m_ - frac * frac;
    }

    void load_aggregates() {
        std::size_t c_max = 0;
        for (Vertex c : assignment_) c_max = std::max<std::size_t>(c_max, c);
        intra_.assign(c_max + 1 + kFreshSlots, 0.0);
        degsum_.assign(c_max + 1 + kFreshSlots, 0.0);
        for (Vertex v = 0; v < g_.vertex_count(); ++v)
            degsum_[assignment_[v]] += static_cast<double>(g_.degree(v));
        for (const auto& [u, v] : g_.edges())
            if (assignment_[u] == assignment_[v]) intra_[assignment_[u]] += 1.0;
    }

    void apply(Vertex v, std::size_t to) {
        const std::size_t from = assignment_[v];
        double links_from = 0.0, links_to = 0.0;
        for (Vertex u : g_.neighbors(v)) {
            if (assignment_[u] == from) links_from += 1.0;
            if (assignment_[u] == to) links_to += 1.0;
        }
        const double kv = static_cast<double>(g_.degree(v));
        intra_[from] -= links_from;
        degsum_[from] -= kv;
        intra_[to] += links_to;
        degsum_[to] += kv;
        assignment_[v] = static_cast<Vertex>(to);
    }

    bool pass() {
        load_aggregates();
        const std::size_t n = g_.vertex_count();
        const std::vector<Vertex> snapshot = assignment_;
        std::vector<char> moved(n, 0);
        std::vector<std::pair<Vertex, std::size_t>> sequence;
        double running = 0.0, best_running = 0.0;
        std::size_t best_len = 0;
        // indices >= `active` are unused fresh slots; exactly one is offered
        // as a target at a time
        std::size_t active = intra_.size() - kFreshSlots;

        std::vector<double> links(intra_.size());
        for (std::size_t step = 0; step < n; ++step) {
            double best_gain = -std::numeric_limits<double>::infinity();
            Vertex best_v = 0;
            std::size_t best_to = 0;
            for (Vertex v = 0; v < n; ++v) {
                if (moved[v]) continue;
                const std::size_t from = assignment_[v];
                std::fill(links.begin(), links.end(), 0.0);
                for (Vertex u : g_.neighbors(v)) links[assignment_[u]] += 1.0;
                const double kv = static_cast<double>(g_.degree(v));
                const std::size_t targets = std::min(active + 1, intra_.size());
                for (std::size_t to = 0; to < targets; ++to) {
                    if (to == from) continue;
                    const double gain =
                        term(intra_[from] - links[from], degsum_[from] - kv) +
                        term(intra_[to] + links[to], degsum_[to] + kv) -
                        term(intra_[from], degsum_[from]) - term(intra_[to], degsum_[to]);
                    if (gain > best_gain + 1e-15) {
                        best_gain = gain;
                        best_v = v;
                        best_to = to;
                    }
                }
            }
            if (best_gain == -std::numeric_limits<double>::infinity()) break;
            if (best_to == active && active + 1 < intra_.size()) ++active;
            apply(best_v, best_to);
            moved[best_v] = 1;
            sequence.emplace_back(best_v, best_to);
            running += best_gain;
            if (running > best_running + 1e-12) {
                best_running = running;
                best_len = sequence.size();
            }
        }

        assignment_ = snapshot;
        if (best_len == 0) return false;
        load_aggregates();
        for (std::size_t t = 0; t < best_len; ++t) apply(sequence[t].first, sequence[t].second);
        return true;
    }

    static constexpr std::size_t kFreshSlots = 4;

    const Graph& g_;
    std::vector<Vertex>& assignment_;
    double m_;
    std::vector<double> intra_;
    std::vector<double> degsum_;
};

void global_refine(const Graph& g, std::vector<Vertex>& assignment) {
    // quadratic per pass; bisection has already done the heavy lifting on
    // anything large
    if (g.vertex_count() > 2048) return;
    MultiwayRefiner refiner(g, assignment);
    refiner.run();
}

std::vector<std::vector<Vertex>> connected_components(const Graph& g) {
    const std::size_t n = g.vertex_count();
    std::vector<char> seen(n, 0);
    std::vector<std::vector<Vertex>> comps;
    std::vector<Vertex> stack;
    for (Vertex root = 0; root < n; ++root) {
        if (seen[root]) continue;
        comps.emplace_back();
        stack.push_back(root);
        seen[root] = 1;
        while (!stack.empty()) {
            const Vertex v = stack.back();
            stack.pop_back();
            comps.back().push_back(v);
            for (Vertex u : g.neighbors(v)) {
                if (!seen[u]) {
                    seen[u] = 1;
                    stack.push_back(u);
                }
            }
        }
        std::sort(comps.back().begin(), comps.back().end());
    }
    return comps;
}

}  // namespace

CommunityPartition partition_communities(const Graph& g, double min_gain) {
    if (min_gain < 0.0) throw std::invalid_argument("partition: min_gain must be >= 0");
    const std::size_t n = g.vertex_count();
    if (n == 0) throw std::invalid_argument("partition: empty graph");
    if (n == 1) return CommunityPartition{{0}, 1, 0.0};
    if (g.edge_count() == 0)
        throw std::invalid_argument("partition: graph has no edges");

    std::vector<std::int32_t> local_buf(n, -1);
    std::vector<std::vector<Vertex>> communities;
    for (auto& comp : connected_components(g))
        bisect_recursive(g, std::move(comp), min_gain, local_buf, communities, 8);

    CommunityPartition part;
    part.assignment.assign(n, 0);
    std::sort(communities.begin(), communities.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (std::size_t c = 0; c < communities.size(); ++c)
        for (Vertex v : communities[c]) part.assignment[v] = static_cast<Vertex>(c);
    global_refine(g, part.assignment);

    // refinement can empty or add communities; relabel compactly, ordered by
    // the smallest vertex of each surviving community
    std::size_t label_max = 0;
    for (Vertex c : part.assignment) label_max = std::max<std::size_t>(label_max, c);
    std::vector<std::int64_t> relabel(label_max + 1, -1);
    Vertex next = 0;
    for (Vertex v = 0; v < n; ++v) {
        if (relabel[part.assignment[v]] < 0) relabel[part.assignment[v]] = next++;
        part.assignment[v] = static_cast<Vertex>(relabel[part.assignment[v]]);
    }
    part.community_count = next;
    part.modularity_value = modularity(g, part.assignment);
    return part;
}

}  // namespace diffwarn::net
