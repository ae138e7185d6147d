#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "diffwarn/rng.hpp"
#include "diffwarn/shds.hpp"

namespace diffwarn::reach {

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    bool empty() const { return lo.empty(); }
    bool contains(std::span<const double> x) const;
    // all 2^dim corner points (dim capped at 20)
    std::vector<std::vector<double>> corners() const;
    void validate() const;
};

// Dynamics interface consumed by the reachability tools: drift/diffusion and
// chain rates for the generator, plus a path runner for Monte Carlo. The u
// and p spans are empty unless the system declares input/parameter boxes.
class HybridSystem {
  public:
    virtual ~HybridSystem() = default;

    virtual int dim() const = 0;
    virtual int noise_dim() const = 0;
    virtual std::vector<std::uint64_t> discrete_states() const = 0;
    virtual Box state_space() const = 0;
    virtual Box input_space() const { return {}; }
    virtual Box parameter_space() const { return {}; }

    virtual void drift(std::uint64_t q, std::span<const double> x,
                       std::span<const double> u, std::span<const double> p,
                       std::span<double> out) const = 0;
    // out is noise_dim x dim, row ch = coordinate loadings of channel ch
    virtual void diffusion(std::uint64_t q, std::span<const double> x,
                           std::span<const double> p, std::span<double> out) const = 0;
    virtual void chain(std::uint64_t q, std::span<const double> x,
                       std::vector<std::pair<std::uint64_t, double>>& out) const = 0;

    // One sample path from (x0, q0). observer is called at t=0 and after each
    // step; returning false stops the path. Implementations stop on their own
    // absorbing sets as well.
    using Observer =
        std::function<bool(double t, std::span<const double> x, std::uint64_t q)>;
    virtual void run(std::span<const double> x0, std::uint64_t q0, double horizon,
                     double dt, RngStream& rng, const Observer& observer) const = 0;
};

// dx = sigma dw on [0,1], absorbing at both ends. sigma may carry an interval
// (parameter box) so certificate checks can sweep its corners; simulation uses
// the nominal value.
class ScalarDiffusion final : public HybridSystem {
  public:
    explicit ScalarDiffusion(double sigma, double sigma_lo = 0.0, double sigma_hi = 0.0);

    int dim() const override { return 1; }
    int noise_dim() const override { return 1; }
    std::vector<std::uint64_t> discrete_states() const override { return {0}; }
    Box state_space() const override { return {{0.0}, {1.0}}; }
    Box parameter_space() const override;

    void drift(std::uint64_t, std::span<const double>, std::span<const double>,
               std::span<const double>, std::span<double> out) const override;
    void diffusion(std::uint64_t, std::span<const double>, std::span<const double> p,
                   std::span<double> out) const override;
    void chain(std::uint64_t, std::span<const double>,
               std::vector<std::pair<std::uint64_t, double>>& out) const override {
        out.clear();
    }
    void run(std::span<const double> x0, std::uint64_t q0, double horizon, double dt,
             RngStream& rng, const Observer& observer) const override;

  private:
    double sigma_;
    double sigma_lo_, sigma_hi_;
};

// Flattens a diffusion Model into the HybridSystem interface. Continuous
// coordinates are the per-community states laid out contiguously; inactive
// communities have frozen (zero drift/diffusion) coordinates. Paths stop once
// every community's adopter mass is exactly zero, which is absorbing.
class ShdsSystem final : public HybridSystem {
  public:
    explicit ShdsSystem(shds::Model model);

    const shds::Model& model() const { return model_; }

    int dim() const override;
    int noise_dim() const override;
    std::vector<std::uint64_t> discrete_states() const override;
    Box state_space() const override;

    void drift(std::uint64_t q, std::span<const double> x, std::span<const double> u,
               std::span<const double> p, std::span<double> out) const override;
    void diffusion(std::uint64_t q, std::span<const double> x,
                   std::span<const double> p, std::span<double> out) const override;
    void chain(std::uint64_t q, std::span<const double> x,
               std::vector<std::pair<std::uint64_t, double>>& out) const override;
    void run(std::span<const double> x0, std::uint64_t q0, double horizon, double dt,
             RngStream& rng, const Observer& observer) const override;

    std::vector<shds::CommunityState> unflatten(std::span<const double> x) const;
    std::vector<double> flatten(const std::vector<shds::CommunityState>& states) const;

  private:
    shds::Model model_;
};

}  // namespace diffwarn::reach
