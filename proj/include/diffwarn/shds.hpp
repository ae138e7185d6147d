#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diffwarn/graph.hpp"
#include "diffwarn/rng.hpp"

namespace diffwarn::shds {

// Hybrid diffusion model: one SDE per community (member-recruitment dynamics
// on the simplex of population fractions), coupled through a continuous-time
// Markov chain over community activation bits whose rates depend on the
// adopter fractions.

struct SigmaHParams {
    double beta = 0.0;    // recruitment rate (P*M mass action)
    double delta1 = 0.0;  // ex-member conversion rate (M*E mass action)
    double delta2 = 0.0;  // spontaneous member exit rate

    void validate() const;
};

struct SigmaBParams {
    double beta1 = 0.0;  // recruitment into camp 1
    double beta2 = 0.0;  // recruitment into camp 2
    double delta1 = 0.0;  // camp 1 exit rate
    double delta2 = 0.0;  // camp 2 exit rate

    void validate() const;
};

enum class Dynamics { SigmaH, SigmaB };

// Population fractions of one community. dim = 3 for (P, M, E), dim = 4 for
// (P, M1, M2, E). Coordinates live on the probability simplex.
struct CommunityState {
    std::array<double, 4> c{};
    int dim = 3;

    double sum() const;
    // adopter fraction: M for three-state dynamics, M1 for four-state
    double adopters() const { return c[1]; }
};

CommunityState make_state_h(double p, double m, double e);
CommunityState make_state_b(double p, double m1, double m2, double e);
CommunityState all_potential_state(Dynamics kind);

// Drift vectors and diffusion matrices. Diffusion columns are the noise
// channels: each carries +/- sqrt(flux) so that every column sums to zero
// (pathwise conservation of the simplex total).
using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;  // [channel][coordinate]

Vec4 drift_h(const CommunityState& s, const SigmaHParams& p);
Mat4 diffusion_h(const CommunityState& s, const SigmaHParams& p);
Vec4 drift_b(const CommunityState& s, const SigmaBParams& p);
Mat4 diffusion_b(const CommunityState& s, const SigmaBParams& p);

// Signed flux bookkeeping behind the drifts: drift = stoichiometry * flux.
// Columns (one per flux) sum to zero exactly, which is the symbolic form of
// d(sum)/dt = 0.
extern const int kStoichH[3][3];  // [coordinate][flux]
extern const int kStoichB[4][4];

int flux_count(Dynamics kind);
Vec4 fluxes_h(const CommunityState& s, const SigmaHParams& p);
Vec4 fluxes_b(const CommunityState& s, const SigmaBParams& p);

// Euler-Maruyama update followed by the simplex projection: negatives clamp
// to zero, then coordinates renormalize to total 1. noise has one draw per
// channel; noise_scale multiplies the diffusion term (1/sqrt(community size)
// for a finite-population reading of the noise).
CommunityState integrate_step(const CommunityState& s, const Vec4& drift,
                              const Mat4& diffusion, double dt,
                              std::span<const double> noise, double noise_scale);

// Piecewise-constant exogenous forcing: value steps at the given times; gain
// per community and coordinate maps the input into the drift.
struct ExogenousInput {
    std::vector<double> times;   // ascending change points
    std::vector<double> values;  // one per change point; value before first is 0
    std::vector<Vec4> gains;     // per community

    double value_at(double t) const;
};

struct Model {
    net::CommunityGraph community_graph;
    Dynamics kind = Dynamics::SigmaH;
    std::vector<SigmaHParams> params_h;  // one per community (SigmaH)
    std::vector<SigmaBParams> params_b;  // one per community (SigmaB)
    bool noise_on = true;
    double lambda = 0.0;            // inter-community interaction rate
    double epsilon = 0.0;           // injected adopter mass; 0 => 5/size_j
    std::optional<ExogenousInput> input;  // default: no forcing
    std::vector<double> noise_scale;      // empty => 1/sqrt(size_j)

    std::size_t community_count() const { return community_graph.community_count; }
    double injection(std::size_t community) const;
    double noise_scale_of(std::size_t community) const;
    int state_dim() const { return kind == Dynamics::SigmaH ? 3 : 4; }
    void validate() const;
};

// Activation bits, community j = bit j. Monotone along any trajectory.
using DiscreteState = std::uint64_t;
constexpr std::size_t kMaxCommunities = 64;

bool is_active(DiscreteState q, std::size_t community);
DiscreteState activate(DiscreteState q, std::size_t community);
std::string bits_string(DiscreteState q, std::size_t k);

// Activation rate of each inactive community given the current continuous
// states: lambda * sum over active meta-neighbors i of M_i * size_i / total.
// Returned as (community, rate) pairs; rates of all other transitions are 0.
std::vector<std::pair<std::size_t, double>> chain_rates(
    const Model& model, const std::vector<CommunityState>& states, DiscreteState q);

struct JumpEvent {
    double time = 0.0;
    std::uint32_t community = 0;
    std::uint32_t source = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<CommunityState>> states;  // [time][community]
    std::vector<DiscreteState> discrete;
    std::vector<JumpEvent> jumps;
    std::size_t community_count = 0;
};

// Full hybrid simulation: EM steps for the active communities interleaved
// with chain jumps sampled by per-step thinning. Newly activated communities
// receive the epsilon injection from their potential pool. record_stride
// controls how often rows are stored (the final state is always recorded).
Trajectory simulate(const Model& model, std::vector<CommunityState> initial,
                    DiscreteState initial_q, double horizon, double dt,
                    std::uint64_t seed, std::size_t record_stride = 1);

// Streaming variant: observer(t, states, q) is called after every step; a
// false return stops the path early. Used by the Monte Carlo layers, which
// must not store whole trajectories.
using PathObserver =
    std::function<bool(double t, const std::vector<CommunityState>&, DiscreteState)>;
void run_path(const Model& model, std::vector<CommunityState> initial,
              DiscreteState initial_q, double horizon, double dt, RngStream& rng,
              const PathObserver& observer, std::vector<JumpEvent>* jump_log = nullptr);

// t,q_bits,community,P,M,E[,M2] rows, one per recorded time and community
std::string trajectory_csv(const Trajectory& tr, Dynamics kind);

}  // namespace diffwarn::shds
