#include "diffwarn/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diffwarn::reach {

bool Box::contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

std::vector<std::vector<double>> Box::corners() const {
    const std::size_t d = dim();
    if (d > 20) throw std::invalid_argument("box: too many dimensions for corner sweep");
    std::vector<std::vector<double>> out;
    const std::size_t count = std::size_t{1} << d;
    out.reserve(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
        std::vector<double> pt(d);
        for (std::size_t i = 0; i < d; ++i) pt[i] = (mask >> i) & 1 ? hi[i] : lo[i];
        out.push_back(std::move(pt));
    }
    return out;
}

void Box::validate() const {
    if (lo.size() != hi.size()) throw std::invalid_argument("box: lo/hi mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i])) throw std::invalid_argument("box: lo > hi");
}

ScalarDiffusion::ScalarDiffusion(double sigma, double sigma_lo, double sigma_hi)
    : sigma_(sigma), sigma_lo_(sigma_lo), sigma_hi_(sigma_hi) {
    if (sigma <= 0.0) throw std::invalid_argument("scalar diffusion: sigma must be > 0");
    if (sigma_hi_ > 0.0 && !(sigma_lo_ <= sigma_hi_))
        throw std::invalid_argument("scalar diffusion: bad sigma interval");
}

Box ScalarDiffusion::parameter_space() const {
    if (sigma_hi_ <= 0.0) return {};
    return {{sigma_lo_}, {sigma_hi_}};
}

void ScalarDiffusion::drift(std::uint64_t, std::span<const double>,
                            std::span<const double>, std::span<const double>,
                            std::span<double> out) const {
    out[0] = 0.0;
}

void ScalarDiffusion::diffusion(std::uint64_t, std::span<const double>,
                                std::span<const double> p, std::span<double> out) const {
    out[0] = p.empty() ? sigma_ : p[0];
}

void ScalarDiffusion::run(std::span<const double> x0, std::uint64_t q0, double horizon,
                          double dt, RngStream& rng, const Observer& observer) const {
    if (x0.size() != 1) throw std::invalid_argument("scalar diffusion: bad start point");
    double x = x0[0];
    if (!observer(0.0, std::span<const double>(&x, 1), q0)) return;
    const double step_sd = sigma_ * std::sqrt(dt);
    double t = 0.0;
    while (t < horizon) {
        const double h = std::min(dt, horizon - t);
        x += (h == dt ? step_sd : sigma_ * std::sqrt(h)) * rng.normal();
        t += h;
        bool absorbed = false;
        if (x <= 0.0) {
            x = 0.0;
            absorbed = true;
        } else if (x >= 1.0) {
            x = 1.0;
            absorbed = true;
        }
        if (!observer(t, std::span<const double>(&x, 1), q0)) return;
        if (absorbed) return;  // stopped process: stays at the boundary
    }
}

ShdsSystem::ShdsSystem(shds::Model model) : model_(std::move(model)) {
    model_.validate();
}

int ShdsSystem::dim() const {
    return static_cast<int>(model_.community_count()) * model_.state_dim();
}

int ShdsSystem::noise_dim() const {
    return static_cast<int>(model_.community_count()) * shds::flux_count(model_.kind);
}

std::vector<std::uint64_t> ShdsSystem::discrete_states() const {
    const std::size_t k = model_.community_count();
    if (k > 20)
        throw std::invalid_argument("shds system: discrete state set too large to enumerate");
    std::vector<std::uint64_t> qs(std::size_t{1} << k);
    for (std::size_t q = 0; q < qs.size(); ++q) qs[q] = q;
    return qs;
}

Box ShdsSystem::state_space() const {
    Box b;
    b.lo.assign(dim(), 0.0);
    b.hi.assign(dim(), 1.0);
    return b;
}

std::vector<shds::CommunityState> ShdsSystem::unflatten(std::span<const double> x) const {
    const int d = model_.state_dim();
    std::vector<shds::CommunityState> states(model_.community_count());
    for (std::size_t j = 0; j < states.size(); ++j) {
        states[j].dim = d;
        for (int i = 0; i < d; ++i) states[j].c[i] = x[j * d + i];
    }
    return states;
}

std::vector<double> ShdsSystem::flatten(const std::vector<shds::CommunityState>& states) const {
    const int d = model_.state_dim();
    std::vector<double> x(states.size() * d);
    for (std::size_t j = 0; j < states.size(); ++j)
        for (int i = 0; i < d; ++i) x[j * d + i] = states[j].c[i];
    return x;
}

void ShdsSystem::drift(std::uint64_t q, std::span<const double> x,
                       std::span<const double> u, std::span<const double>,
                       std::span<double> out) const {
    const int d = model_.state_dim();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < model_.community_count(); ++j) {
        if (!shds::is_active(q, j)) continue;
        shds::CommunityState s;
        s.dim = d;
        for (int i = 0; i < d; ++i) s.c[i] = x[j * d + i];
        shds::Vec4 f;
        if (model_.kind == shds::Dynamics::SigmaH) {
            const auto& p = model_.params_h.size() == 1 ? model_.params_h[0]
                                                        : model_.params_h[j];
            f = shds::drift_h(s, p);
        } else {
            const auto& p = model_.params_b.size() == 1 ? model_.params_b[0]
                                                        : model_.params_b[j];
            f = shds::drift_b(s, p);
        }
        if (!u.empty() && model_.input)
            for (int i = 0; i < d; ++i) f[i] += model_.input->gains[j][i] * u[0];
        for (int i = 0; i < d; ++i) out[j * d + i] = f[i];
    }
}

void ShdsSystem::diffusion(std::uint64_t q, std::span<const double> x,
                           std::span<const double>, std::span<double> out) const {
    const int d = model_.state_dim();
    const int channels = shds::flux_count(model_.kind);
    const int n = dim();
    std::fill(out.begin(), out.end(), 0.0);
    if (!model_.noise_on) return;
    for (std::size_t j = 0; j < model_.community_count(); ++j) {
        if (!shds::is_active(q, j)) continue;
        shds::CommunityState s;
        s.dim = d;
        for (int i = 0; i < d; ++i) s.c[i] = x[j * d + i];
        shds::Mat4 g;
        if (model_.kind == shds::Dynamics::SigmaH)
            g = shds::diffusion_h(s, model_.params_h.size() == 1 ? model_.params_h[0]
                                                                 : model_.params_h[j]);
        else
            g = shds::diffusion_b(s, model_.params_b.size() == 1 ? model_.params_b[0]
                                                                 : model_.params_b[j]);
        const double scale = model_.noise_scale_of(j);
        for (int ch = 0; ch < channels; ++ch)
            for (int i = 0; i < d; ++i)
                out[(j * channels + ch) * n + j * d + i] = scale * g[ch][i];
    }
}

void ShdsSystem::chain(std::uint64_t q, std::span<const double> x,
                       std::vector<std::pair<std::uint64_t, double>>& out) const {
    out.clear();
    const auto states = unflatten(x);
    for (const auto& [community, rate] : shds::chain_rates(model_, states, q))
        out.emplace_back(shds::activate(q, community), rate);
}

void ShdsSystem::run(std::span<const double> x0, std::uint64_t q0, double horizon,
                     double dt, RngStream& rng, const Observer& observer) const {
    auto states = unflatten(x0);
    std::vector<double> flat(dim());
    shds::run_path(model_, std::move(states), q0, horizon, dt, rng,
                   [&](double t, const std::vector<shds::CommunityState>& st,
                       shds::DiscreteState q) {
                       const int d = model_.state_dim();
                       double members = 0.0;
                       for (std::size_t j = 0; j < st.size(); ++j) {
                           for (int i = 0; i < d; ++i) flat[j * d + i] = st[j].c[i];
                           members += st[j].c[1] + (d == 4 ? st[j].c[2] : 0.0);
                       }
                       if (!observer(t, flat, q)) return false;
                       // all-zero adopter mass is absorbing for these dynamics
                       return !(t > 0.0 && members == 0.0);
                   });
}

}  // namespace diffwarn::reach
