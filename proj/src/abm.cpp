#include "diffwarn/abm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diffwarn/csv.hpp"
#include "diffwarn/netgen.hpp"

namespace diffwarn::abm {

void Params::validate() const {
    for (double p : {beta_p, delta1_p, delta2_p})
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("abm params must be probabilities in [0,1]");
}

std::size_t State::count(AgentState s) const {
    std::size_t c = 0;
    for (AgentState l : labels)
        if (l == s) ++c;
    return c;
}

State make_state(std::size_t vertex_count, const std::vector<net::Vertex>& member_seeds) {
    State st;
    st.labels.assign(vertex_count, AgentState::Potential);
    for (net::Vertex v : member_seeds) {
        if (v >= vertex_count)
            throw std::invalid_argument("abm: seed vertex out of range");
        st.labels[v] = AgentState::Member;
    }
    return st;
}

namespace {

// Incremental simulation engine. Member/ex neighbor counts are kept per
// vertex; a vertex changes state at most twice (P->M->E), so count updates
// cost O(sum deg) over a whole trial rather than per step.
class Simulation {
  public:
    Simulation(const net::Graph& g, const Params& params, State initial)
        : g_(g), params_(params), state_(std::move(initial)) {
        if (state_.labels.size() != g_.vertex_count())
            throw std::invalid_argument("abm: state size does not match graph");
        params_.validate();
        member_nbrs_.assign(g_.vertex_count(), 0);
        ex_nbrs_.assign(g_.vertex_count(), 0);
        member_count_ = 0;
        for (net::Vertex v = 0; v < g_.vertex_count(); ++v) {
            switch (state_.labels[v]) {
                case AgentState::Member:
                    ++member_count_;
                    for (net::Vertex u : g_.neighbors(v)) ++member_nbrs_[u];
                    break;
                case AgentState::Ex:
                    for (net::Vertex u : g_.neighbors(v)) ++ex_nbrs_[u];
                    break;
                case AgentState::Potential:
                    break;
            }
        }
    }

    void step(RngStream& rng) {
        flips_.clear();
        const double log_keep_beta = std::log1p(-std::min(params_.beta_p, 1.0));
        const std::size_t n = g_.vertex_count();
        for (net::Vertex v = 0; v < n; ++v) {
            switch (state_.labels[v]) {
                case AgentState::Potential: {
                    const std::uint32_t m = member_nbrs_[v];
                    if (m == 0) break;
                    double p_convert;
                    if (params_.beta_p >= 1.0)
                        p_convert = 1.0;
                    else
                        p_convert = -std::expm1(static_cast<double>(m) * log_keep_beta);
                    if (rng.bernoulli(p_convert)) flips_.push_back(v);
                    break;
                }
                case AgentState::Member: {
                    const std::uint32_t e = ex_nbrs_[v];
                    double survive = 1.0 - params_.delta2_p;
                    if (e > 0) {
                        if (params_.delta1_p >= 1.0)
                            survive = 0.0;
                        else
                            survive *= std::pow(1.0 - params_.delta1_p,
                                                static_cast<double>(e));
                    }
                    if (rng.bernoulli(1.0 - survive)) flips_.push_back(v);
                    break;
                }
                case AgentState::Ex:
                    break;
            }
        }
        for (net::Vertex v : flips_) {
            if (state_.labels[v] == AgentState::Potential) {
                state_.labels[v] = AgentState::Member;
                ++member_count_;
                for (net::Vertex u : g_.neighbors(v)) ++member_nbrs_[u];
            } else {
                state_.labels[v] = AgentState::Ex;
                --member_count_;
                for (net::Vertex u : g_.neighbors(v)) {
                    --member_nbrs_[u];
                    ++ex_nbrs_[u];
                }
            }
        }
        ++state_.step_count;
    }

    const State& state() const { return state_; }
    State take_state() && { return std::move(state_); }
    std::size_t member_count() const { return member_count_; }
    const std::vector<net::Vertex>& last_flips() const { return flips_; }

  private:
    const net::Graph& g_;
    Params params_;
    State state_;
    std::vector<std::uint32_t> member_nbrs_;
    std::vector<std::uint32_t> ex_nbrs_;
    std::vector<net::Vertex> flips_;
    std::size_t member_count_ = 0;
};

}  // namespace

State step(const State& state, const net::Graph& g, const Params& params,
           RngStream& rng) {
    Simulation sim(g, params, state);
    sim.step(rng);
    return std::move(sim).take_state();
}

bool run_cascade_trial(const net::Graph& g, const Params& params,
                       const std::vector<net::Vertex>& seed_vertices,
                       const std::vector<net::Vertex>& target_vertices,
                       std::uint64_t max_steps, std::uint64_t seed) {
    if (seed_vertices.empty())
        throw std::invalid_argument("cascade trial: empty seed set");
    std::vector<char> is_target(g.vertex_count(), 0);
    for (net::Vertex v : target_vertices) {
        if (v >= g.vertex_count())
            throw std::invalid_argument("cascade trial: target vertex out of range");
        is_target[v] = 1;
    }
    for (net::Vertex v : seed_vertices)
        if (v < g.vertex_count() && is_target[v])
            throw std::invalid_argument("cascade trial: seed and target sets overlap");

    Simulation sim(g, params, make_state(g.vertex_count(), seed_vertices));
    RngStream rng(seed);
    for (std::uint64_t s = 0; s < max_steps && sim.member_count() > 0; ++s) {
        sim.step(rng);
        for (net::Vertex v : sim.last_flips())
            if (is_target[v] && sim.state().labels[v] == AgentState::Member) return true;
    }
    return false;
}

std::vector<CascadeResult> cascade_probability(const CascadeConfig& config,
                                               std::uint64_t master_seed) {
    if (config.ratio_grid.empty())
        throw std::invalid_argument("cascade probability: empty ratio grid");
    if (config.realizations_per_ratio == 0 || config.trials_per_realization == 0)
        throw std::invalid_argument("cascade probability: counts must be >= 1");
    config.params.validate();

    const std::size_t half = config.n / 2;
    if (config.seeds_per_trial == 0 || config.seeds_per_trial > half)
        throw std::invalid_argument("cascade probability: bad seeds_per_trial");
    std::vector<CascadeResult> out;
    for (std::size_t gi = 0; gi < config.ratio_grid.size(); ++gi) {
        const double ratio = config.ratio_grid[gi];
        if (ratio <= 0.0) throw std::invalid_argument("cascade probability: ratio <= 0");
        const double p_i = config.effective_p_i();
        const double p_e = std::min(p_i / ratio, 1.0);
        std::uint64_t hits = 0;
        std::uint64_t runs = 0;
        for (std::size_t r = 0; r < config.realizations_per_ratio; ++r) {
            const net::Graph g = net::generate_planted_partition(
                config.n, p_i, p_e, derive_seed(master_seed, gi, r, 0));
            // targets: the L half; seeds drawn in the R half
            std::vector<net::Vertex> targets(half);
            for (std::size_t v = 0; v < half; ++v) targets[v] = static_cast<net::Vertex>(v);
            for (std::size_t t = 0; t < config.trials_per_realization; ++t) {
                RngStream pick(derive_seed(master_seed, gi, r, 1 + t));
                std::vector<net::Vertex> seeds;
                while (seeds.size() < config.seeds_per_trial) {
                    const net::Vertex v =
                        static_cast<net::Vertex>(half + pick.uniform_index(half));
                    if (std::find(seeds.begin(), seeds.end(), v) == seeds.end())
                        seeds.push_back(v);
                }
                const bool hit = run_cascade_trial(
                    g, config.params, seeds, targets, config.effective_max_steps(),
                    derive_seed(master_seed, gi, r, 1000000 + t));
                hits += hit ? 1 : 0;
                ++runs;
            }
        }
        CascadeResult res;
        res.ratio = ratio;
        res.runs = runs;
        res.probability_estimate = static_cast<double>(hits) / static_cast<double>(runs);
        res.standard_error = std::sqrt(res.probability_estimate *
                                       (1.0 - res.probability_estimate) /
                                       static_cast<double>(runs));
        out.push_back(res);
    }
    return out;
}

std::string cascade_csv(const std::vector<CascadeResult>& results) {
    CsvWriter w({"ratio", "p_hat", "stderr", "runs"});
    for (const auto& r : results)
        w.add_row({fmt_double(r.ratio), fmt_double(r.probability_estimate),
                   fmt_double(r.standard_error), fmt_int(static_cast<long long>(r.runs))});
    return w.text();
}

}  // namespace diffwarn::abm
