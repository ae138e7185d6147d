#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffwarn/hybrid.hpp"
#include "diffwarn/poly.hpp"

namespace diffwarn::reach {

// Semialgebraic state set: optional bounding box plus polynomial constraints
// g_k(x) >= 0, with an optional filter on the discrete state.
struct DiscreteFilter {
    enum class Kind { Any, MinActive, BitsActive, StateSet };
    Kind kind = Kind::Any;
    std::size_t min_active = 0;              // MinActive
    std::uint64_t required_bits = 0;         // BitsActive: all these bits set
    std::vector<std::uint64_t> state_set;    // StateSet: explicit q list

    bool accepts(std::uint64_t q) const;
};

struct StateRegion {
    std::optional<Box> box;
    std::vector<Polynomial> constraints;
    DiscreteFilter discrete;

    bool contains(std::span<const double> x) const;
    bool contains(std::span<const double> x, std::uint64_t q) const;
};

// Polynomial family {A_q} with a claimed reach-probability bound gamma.
// Either per-state polynomials, a shared one, or both (per-state overrides).
// Time-augmented certificates take (x, t) with t as the trailing variable.
struct AltitudeCertificate {
    std::map<std::uint64_t, Polynomial> per_state;
    std::optional<Polynomial> shared;
    double gamma = 1.0;
    bool time_augmented = false;
    int degree_bound = 8;

    const Polynomial& poly_for(std::uint64_t q) const;
    void validate() const;
};

AltitudeCertificate certificate_from_json(const std::string& json_text);
std::string certificate_to_json(const AltitudeCertificate& cert);
StateRegion region_from_json(const std::string& json_text, std::size_t dim);
std::string region_to_json(const StateRegion& region);

// Infinitesimal generator applied to the certificate at one point:
//   BA_q(x) = dA_q/dx . (f_q + H_q u) + (1/2) tr[G^T (d2A_q/dx2) G]
//             + sum_q' lambda_qq' (A_q'(x) - A_q(x))   [+ dA_q/dt when
//             time-augmented; x then carries t as its last coordinate].
double generator_apply(const AltitudeCertificate& cert, const HybridSystem& system,
                       std::span<const double> x, std::uint64_t q,
                       std::span<const double> u = {}, std::span<const double> p = {});

enum class HorizonKind { Infinite, Finite };

struct SamplePlan {
    std::size_t space_points = 10000;   // over X
    std::size_t region_points = 1000;   // over each of X0, Xs
    double tolerance = 1e-9;            // condition slack
    double horizon = 0.0;               // T for finite-horizon certificates
    std::size_t rejection_factor = 64;  // sampling attempts per kept point
};

struct ConditionResult {
    std::string name;
    bool pass = true;
    double worst_margin = 0.0;  // most negative slack observed
    std::vector<double> worst_point;
    std::uint64_t worst_q = 0;
    std::size_t samples = 0;
};

struct CheckReport {
    std::vector<ConditionResult> conditions;  // the four theorem conditions
    bool pass = false;
    double gamma = 1.0;
    HorizonKind horizon = HorizonKind::Infinite;
    std::string plan_descriptor;

    std::string text() const;  // human-readable, marked as sampled evidence
};

// Samples the four certificate conditions over X0/Xs/X (low-discrepancy
// points, plus parameter/input box corners for the generator condition).
// A pass is *sampled evidence* for gamma as an upper bound, not a proof.
CheckReport check_certificate(const AltitudeCertificate& cert,
                              const HybridSystem& system, const StateRegion& x0,
                              const StateRegion& xs, const SamplePlan& plan,
                              HorizonKind horizon);

struct ReachEstimate {
    enum class Kind { McEstimate, CertifiedUpperBound };
    Kind kind = Kind::McEstimate;
    double value = 0.0;        // p-hat or gamma
    double half_width = 0.0;   // z * sqrt(p(1-p)/runs); 0 for bounds
    double z = 1.96;
    std::uint64_t runs = 0;
    HorizonKind horizon = HorizonKind::Infinite;
    double horizon_T = 0.0;  // simulated cap (infinite-surrogate) or T

    std::string csv() const;
};

struct StartPoint {
    std::vector<double> x;
    std::uint64_t q = 0;
};
using StartSampler = std::function<StartPoint(RngStream&)>;

struct McOptions {
    std::uint64_t runs = 10000;
    double dt = 1e-2;
    HorizonKind horizon = HorizonKind::Infinite;
    double horizon_T = 0.0;  // finite horizon, or cap override for infinite
    double z = 1.96;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    double effective_T() const {
        if (horizon == HorizonKind::Finite) return horizon_T;
        return horizon_T > 0.0 ? horizon_T : 1e4;
    }
};

// Fraction of independent paths that enter the target region (checked at
// every step, including t=0) before the horizon / absorption. Trial i uses
// the substream derived from (seed, i), so results do not depend on
// execution order or thread count.
ReachEstimate mc_reach(const HybridSystem& system, const StartSampler& start,
                       const StateRegion& target, const McOptions& opts);

struct PredictabilityVerdict {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double delta = 0.0;
    bool predictable = false;
};

enum class PredictabilityMethod { MonteCarlo, CertificatePair };

// |gamma1 - gamma2| > delta test over a pair of disjoint outcome regions.
// MonteCarlo estimates both probabilities; CertificatePair checks the two
// supplied certificates and uses their bounds.
PredictabilityVerdict es_predictability(
    const HybridSystem& system, const StartSampler& start, const StateRegion& xs1,
    const StateRegion& xs2, double delta, PredictabilityMethod method,
    const McOptions& opts, const AltitudeCertificate* cert1 = nullptr,
    const AltitudeCertificate* cert2 = nullptr, const StateRegion* x0_region = nullptr,
    const SamplePlan* plan = nullptr);

struct GridSpec {
    std::vector<std::size_t> cells;  // per dimension, over the state-space box

    std::size_t total() const;
};

struct WarningRegion {
    GridSpec grid;
    Box space;
    double alpha = 0.0;
    std::vector<double> p_hat;  // per cell, row-major over grid
    std::vector<char> flagged;  // p_hat >= alpha

    std::vector<double> cell_center(std::size_t index) const;
    std::string csv() const;  // cell,center...,p_hat,flagged
};

// Flags every grid cell whose estimated reach probability to xs meets alpha.
// Cells whose centers already lie in xs are flagged without simulation.
WarningRegion warning_region(const HybridSystem& system, const StateRegion& xs,
                             double alpha, const GridSpec& grid,
                             std::uint64_t runs_per_cell, const McOptions& opts,
                             std::uint64_t q0);

// Low-discrepancy points over a box (Halton sequence), optionally filtered by
// a region; throws if the region yields no points within the attempt budget.
std::vector<std::vector<double>> low_discrepancy_points(const Box& box,
                                                        std::size_t count,
                                                        std::size_t skip = 0);
std::vector<std::vector<double>> sample_region(const StateRegion& region,
                                               const Box& fallback_box,
                                               std::size_t count,
                                               std::size_t rejection_factor);

}  // namespace diffwarn::reach
