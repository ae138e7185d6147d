#include "diffwarn/shds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diffwarn/csv.hpp"

namespace diffwarn::shds {

void SigmaHParams::validate() const {
    if (beta < 0.0 || delta1 < 0.0 || delta2 < 0.0)
        throw std::invalid_argument("sigma-h params must be nonnegative");
}

void SigmaBParams::validate() const {
    if (beta1 < 0.0 || beta2 < 0.0 || delta1 < 0.0 || delta2 < 0.0)
        throw std::invalid_argument("sigma-b params must be nonnegative");
}

double CommunityState::sum() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += c[i];
    return s;
}

CommunityState make_state_h(double p, double m, double e) {
    return CommunityState{{p, m, e, 0.0}, 3};
}

CommunityState make_state_b(double p, double m1, double m2, double e) {
    return CommunityState{{p, m1, m2, e}, 4};
}

CommunityState all_potential_state(Dynamics kind) {
    return kind == Dynamics::SigmaH ? make_state_h(1.0, 0.0, 0.0)
                                    : make_state_b(1.0, 0.0, 0.0, 0.0);
}

// flux order H: recruitment (beta P M), conversion (delta1 M E), exit (delta2 M)
const int kStoichH[3][3] = {
    {-1, 0, 0},  // P
    {+1, -1, -1},  // M
    {0, +1, +1},  // E
};

// flux order B: beta1 P M1, beta2 P M2, delta1 M1, delta2 M2
const int kStoichB[4][4] = {
    {-1, -1, 0, 0},   // P
    {+1, 0, -1, 0},   // M1
    {0, +1, 0, -1},   // M2
    {0, 0, +1, +1},   // E
};

int flux_count(Dynamics kind) { return kind == Dynamics::SigmaH ? 3 : 4; }

Vec4 fluxes_h(const CommunityState& s, const SigmaHParams& p) {
    const double P = s.c[0], M = s.c[1], E = s.c[2];
    return {p.beta * P * M, p.delta1 * M * E, p.delta2 * M, 0.0};
}

Vec4 fluxes_b(const CommunityState& s, const SigmaBParams& p) {
    const double P = s.c[0], M1 = s.c[1], M2 = s.c[2];
    return {p.beta1 * P * M1, p.beta2 * P * M2, p.delta1 * M1, p.delta2 * M2};
}

namespace {

template <int Dim, int Flux>
Vec4 apply_stoich(const int (&stoich)[Dim][Flux], const Vec4& flux) {
    Vec4 out{};
    for (int i = 0; i < Dim; ++i) {
        double acc = 0.0;
        for (int f = 0; f < Flux; ++f) acc += stoich[i][f] * flux[f];
        out[i] = acc;
    }
    return out;
}

template <int Dim, int Flux>
Mat4 apply_stoich_sqrt(const int (&stoich)[Dim][Flux], const Vec4& flux) {
    Mat4 out{};
    for (int f = 0; f < Flux; ++f) {
        const double amp = std::sqrt(std::max(flux[f], 0.0));
        for (int i = 0; i < Dim; ++i) out[f][i] = stoich[i][f] * amp;
    }
    return out;
}

}  // namespace

Vec4 drift_h(const CommunityState& s, const SigmaHParams& p) {
    return apply_stoich(kStoichH, fluxes_h(s, p));
}

Mat4 diffusion_h(const CommunityState& s, const SigmaHParams& p) {
    return apply_stoich_sqrt(kStoichH, fluxes_h(s, p));
}

Vec4 drift_b(const CommunityState& s, const SigmaBParams& p) {
    return apply_stoich(kStoichB, fluxes_b(s, p));
}

Mat4 diffusion_b(const CommunityState& s, const SigmaBParams& p) {
    return apply_stoich_sqrt(kStoichB, fluxes_b(s, p));
}

CommunityState integrate_step(const CommunityState& s, const Vec4& drift,
                              const Mat4& diffusion, double dt,
                              std::span<const double> noise, double noise_scale) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_step: dt must be > 0");
    const double sqrt_dt = std::sqrt(dt);
    CommunityState out = s;
    for (int i = 0; i < s.dim; ++i) {
        if (!std::isfinite(s.c[i]) || !std::isfinite(drift[i]))
            throw std::invalid_argument("integrate_step: non-finite input");
        double x = s.c[i] + drift[i] * dt;
        for (std::size_t ch = 0; ch < noise.size(); ++ch)
            x += noise_scale * diffusion[ch][i] * noise[ch] * sqrt_dt;
        out.c[i] = x;
    }
    double total = 0.0;
    for (int i = 0; i < s.dim; ++i) {
        if (out.c[i] < 0.0) out.c[i] = 0.0;
        total += out.c[i];
    }
    if (total > 0.0 && total != 1.0)
        for (int i = 0; i < s.dim; ++i) out.c[i] /= total;
    return out;
}

double ExogenousInput::value_at(double t) const {
    double v = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (t >= times[i]) v = values[i];
        else break;
    }
    return v;
}

double Model::injection(std::size_t community) const {
    if (epsilon > 0.0) return epsilon;
    const double auto_eps = 5.0 / static_cast<double>(community_graph.sizes[community]);
    return std::min(auto_eps, 0.1);
}

double Model::noise_scale_of(std::size_t community) const {
    if (!noise_scale.empty()) return noise_scale[community];
    return 1.0 / std::sqrt(static_cast<double>(community_graph.sizes[community]));
}

void Model::validate() const {
    const std::size_t k = community_count();
    if (k == 0 || k > kMaxCommunities)
        throw std::invalid_argument("model: community count out of range");
    if (community_graph.sizes.size() != k)
        throw std::invalid_argument("model: sizes do not match community count");
    for (auto s : community_graph.sizes)
        if (s == 0) throw std::invalid_argument("model: community size must be positive");
    for (const auto& [a, b] : community_graph.meta_edges)
        if (a >= k || b >= k)
            throw std::invalid_argument("model: meta edge out of range");
    if (lambda < 0.0 || !std::isfinite(lambda))
        throw std::invalid_argument("model: lambda must be finite and >= 0");
    if (epsilon != 0.0 && (epsilon <= 0.0 || epsilon > 0.1))
        throw std::invalid_argument("model: epsilon must lie in (0, 0.1]");
    if (kind == Dynamics::SigmaH) {
        if (params_h.size() != 1 && params_h.size() != k)
            throw std::invalid_argument("model: need 1 or K sigma-h parameter sets");
        for (const auto& p : params_h) p.validate();
    } else {
        if (params_b.size() != 1 && params_b.size() != k)
            throw std::invalid_argument("model: need 1 or K sigma-b parameter sets");
        for (const auto& p : params_b) p.validate();
    }
    if (!noise_scale.empty() && noise_scale.size() != k)
        throw std::invalid_argument("model: noise_scale must have one entry per community");
    if (input) {
        if (input->times.size() != input->values.size())
            throw std::invalid_argument("model: input times/values mismatch");
        if (!std::is_sorted(input->times.begin(), input->times.end()))
            throw std::invalid_argument("model: input change points must ascend");
        if (input->gains.size() != k)
            throw std::invalid_argument("model: input gains must have one entry per community");
    }
}

bool is_active(DiscreteState q, std::size_t community) {
    return (q >> community) & 1ULL;
}

DiscreteState activate(DiscreteState q, std::size_t community) {
    return q | (1ULL << community);
}

std::string bits_string(DiscreteState q, std::size_t k) {
    std::string s(k, '0');
    for (std::size_t i = 0; i < k; ++i)
        if (is_active(q, i)) s[i] = '1';
    return s;
}

std::vector<std::pair<std::size_t, double>> chain_rates(
    const Model& model, const std::vector<CommunityState>& states, DiscreteState q) {
    const auto adj = model.community_graph.adjacency();
    const double total = static_cast<double>(model.community_graph.total_size());
    std::vector<std::pair<std::size_t, double>> rates;
    for (std::size_t j = 0; j < model.community_count(); ++j) {
        if (is_active(q, j)) continue;
        double weighted = 0.0;
        for (net::Vertex i : adj[j]) {
            if (!is_active(q, i)) continue;
            weighted += states[i].adopters() *
                        static_cast<double>(model.community_graph.sizes[i]) / total;
        }
        if (weighted > 0.0) rates.emplace_back(j, model.lambda * weighted);
    }
    return rates;
}

namespace {

CommunityState injected(Dynamics kind, double eps) {
    return kind == Dynamics::SigmaH ? make_state_h(1.0 - eps, eps, 0.0)
                                    : make_state_b(1.0 - eps, eps, 0.0, 0.0);
}

}  // namespace

void run_path(const Model& model, std::vector<CommunityState> states,
              DiscreteState q, double horizon, double dt, RngStream& rng,
              const PathObserver& observer, std::vector<JumpEvent>* jump_log) {
    model.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("run_path: horizon must be > 0");
    if (!(dt > 0.0) || dt >= horizon)
        throw std::invalid_argument("run_path: need 0 < dt < horizon");
    const std::size_t k = model.community_count();
    if (states.size() != k)
        throw std::invalid_argument("run_path: initial states do not match community count");
    for (std::size_t j = 0; j < k; ++j) {
        if (states[j].dim != model.state_dim())
            throw std::invalid_argument("run_path: state dimension mismatch");
        if (!is_active(q, j) && states[j].adopters() != 0.0)
            throw std::invalid_argument("run_path: inactive community with adopters");
    }

    const auto adj = model.community_graph.adjacency();
    const double total = static_cast<double>(model.community_graph.total_size());
    const int channels = flux_count(model.kind);

    if (!observer(0.0, states, q)) return;

    double t = 0.0;
    Vec4 noise{};
    std::vector<double> fire(k);
    while (t < horizon) {
        const double h = std::min(dt, horizon - t);

        // activation rates from the pre-step states
        std::fill(fire.begin(), fire.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            if (is_active(q, j)) continue;
            double weighted = 0.0;
            for (net::Vertex i : adj[j]) {
                if (!is_active(q, i)) continue;
                weighted += states[i].adopters() *
                            static_cast<double>(model.community_graph.sizes[i]) / total;
            }
            fire[j] = model.lambda * weighted;
        }

        const double u_in = model.input ? model.input->value_at(t) : 0.0;

        // EM update of every active community
        for (std::size_t j = 0; j < k; ++j) {
            if (!is_active(q, j)) continue;
            Vec4 drift;
            Mat4 diff;
            if (model.kind == Dynamics::SigmaH) {
                const auto& p = model.params_h.size() == 1 ? model.params_h[0]
                                                           : model.params_h[j];
                drift = drift_h(states[j], p);
                diff = diffusion_h(states[j], p);
            } else {
                const auto& p = model.params_b.size() == 1 ? model.params_b[0]
                                                           : model.params_b[j];
                drift = drift_b(states[j], p);
                diff = diffusion_b(states[j], p);
            }
            if (u_in != 0.0 && model.input)
                for (int i = 0; i < model.state_dim(); ++i)
                    drift[i] += model.input->gains[j][i] * u_in;
            if (model.noise_on) {
                for (int ch = 0; ch < channels; ++ch) noise[ch] = rng.normal();
                states[j] = integrate_step(states[j], drift, diff, h,
                                           std::span<const double>(noise.data(), channels),
                                           model.noise_scale_of(j));
            } else {
                states[j] = integrate_step(states[j], drift, diff, h, {}, 0.0);
            }
        }

        // thinning: each inactive community with positive rate may activate
        for (std::size_t j = 0; j < k; ++j) {
            if (fire[j] <= 0.0) continue;
            const double p_jump = -std::expm1(-fire[j] * h);
            if (!rng.bernoulli(p_jump)) continue;
            // attribute the jump to one active neighbor, by contribution
            double pick = rng.uniform() * fire[j] / model.lambda;
            std::uint32_t source = 0;
            for (net::Vertex i : adj[j]) {
                if (!is_active(q, i)) continue;
                const double w = states[i].adopters() *
                                 static_cast<double>(model.community_graph.sizes[i]) / total;
                source = i;
                if (pick < w) break;
                pick -= w;
            }
            q = activate(q, j);
            states[j] = injected(model.kind, model.injection(j));
            if (jump_log) jump_log->push_back({t + h, static_cast<std::uint32_t>(j), source});
        }

        t += h;
        if (!observer(t, states, q)) return;
    }
}

Trajectory simulate(const Model& model, std::vector<CommunityState> initial,
                    DiscreteState initial_q, double horizon, double dt,
                    std::uint64_t seed, std::size_t record_stride) {
    if (record_stride == 0) record_stride = 1;
    Trajectory tr;
    tr.community_count = model.community_count();
    RngStream rng(seed);
    std::size_t step = 0;
    run_path(
        model, std::move(initial), initial_q, horizon, dt, rng,
        [&](double t, const std::vector<CommunityState>& states, DiscreteState q) {
            if (step % record_stride == 0 || t >= horizon) {
                tr.times.push_back(t);
                tr.states.push_back(states);
                tr.discrete.push_back(q);
            }
            ++step;
            return true;
        },
        &tr.jumps);
    return tr;
}

std::string trajectory_csv(const Trajectory& tr, Dynamics kind) {
    const bool four = kind == Dynamics::SigmaB;
    std::vector<std::string> header = {"t", "q_bits", "community", "P", "M", "E"};
    if (four) header.push_back("M2");
    CsvWriter w(header);
    for (std::size_t row = 0; row < tr.times.size(); ++row) {
        const std::string bits = bits_string(tr.discrete[row], tr.community_count);
        for (std::size_t j = 0; j < tr.community_count; ++j) {
            const auto& s = tr.states[row][j];
            // four-state rows report (P, M1, E, M2) under P,M,E,M2
            if (four)
                w.add_row({fmt_double(tr.times[row]), bits, fmt_int((long long)j),
                           fmt_double(s.c[0]), fmt_double(s.c[1]), fmt_double(s.c[3]),
                           fmt_double(s.c[2])});
            else
                w.add_row({fmt_double(tr.times[row]), bits, fmt_int((long long)j),
                           fmt_double(s.c[0]), fmt_double(s.c[1]), fmt_double(s.c[2])});
        }
    }
    return w.text();
}

}  // namespace diffwarn::shds
