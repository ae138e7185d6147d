#include <doctest.h>

#include <cmath>

#include "diffwarn/shds.hpp"

using namespace diffwarn;
using namespace diffwarn::shds;

namespace {

Model two_community_model(double lambda, bool noise_on = false) {
    Model m;
    m.community_graph.community_count = 2;
    m.community_graph.sizes = {1000, 1000};
    m.community_graph.meta_edges = {{0, 1}};
    m.kind = Dynamics::SigmaH;
    m.params_h = {{0.5, 0.05, 0.1}};
    m.noise_on = noise_on;
    m.lambda = lambda;
    m.epsilon = 0.01;
    return m;
}

}  // namespace

TEST_SUITE("shds") {

TEST_CASE("drift vanishes at the adopter-free fixed point") {
    const SigmaHParams p{0.7, 0.2, 0.1};
    const auto d = drift_h(make_state_h(1.0, 0.0, 0.0), p);
    for (int i = 0; i < 3; ++i) CHECK(d[i] == 0.0);
    const auto g = diffusion_h(make_state_h(1.0, 0.0, 0.0), p);
    for (int ch = 0; ch < 3; ++ch)
        for (int i = 0; i < 3; ++i) CHECK(g[ch][i] == 0.0);

    const SigmaBParams pb{0.7, 0.4, 0.2, 0.1};
    const auto db = drift_b(make_state_b(0.6, 0.0, 0.0, 0.4), pb);
    for (int i = 0; i < 4; ++i) CHECK(db[i] == 0.0);
}

TEST_CASE("drift matches direct substitution") {
    // degree-scaled parameters: beta = 0.5*20, delta1 = 0.01*20, delta2 = 0.1
    const SigmaHParams p{10.0, 0.2, 0.1};
    const auto d = drift_h(make_state_h(0.9, 0.1, 0.0), p);
    CHECK(d[0] == doctest::Approx(-0.9).epsilon(1e-12));
    CHECK(d[1] == doctest::Approx(0.89).epsilon(1e-12));
    CHECK(d[2] == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("stoichiometry columns sum to zero exactly") {
    for (int f = 0; f < 3; ++f) {
        int col = 0;
        for (int i = 0; i < 3; ++i) col += kStoichH[i][f];
        CHECK(col == 0);
    }
    for (int f = 0; f < 4; ++f) {
        int col = 0;
        for (int i = 0; i < 4; ++i) col += kStoichB[i][f];
        CHECK(col == 0);
    }
}

TEST_CASE("diffusion columns sum to zero on random simplex states") {
    RngStream rng(4);
    const SigmaHParams ph{0.8, 0.3, 0.2};
    const SigmaBParams pb{0.8, 0.5, 0.3, 0.2};
    for (int rep = 0; rep < 25; ++rep) {
        double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
        const double total3 = a + b + c;
        const auto gh = diffusion_h(make_state_h(a / total3, b / total3, c / total3), ph);
        for (int ch = 0; ch < 3; ++ch) {
            double sum = 0.0;
            for (int i = 0; i < 3; ++i) sum += gh[ch][i];
            CHECK(sum == 0.0);
        }
        double d = rng.uniform();
        const double total4 = a + b + c + d;
        const auto gb = diffusion_b(
            make_state_b(a / total4, b / total4, c / total4, d / total4), pb);
        for (int ch = 0; ch < 4; ++ch) {
            double sum = 0.0;
            for (int i = 0; i < 4; ++i) sum += gb[ch][i];
            CHECK(sum == 0.0);
        }
    }
}

TEST_CASE("drift coordinates sum to zero on random states") {
    RngStream rng(6);
    const SigmaHParams ph{1.2, 0.4, 0.3};
    const SigmaBParams pb{1.2, 0.9, 0.4, 0.3};
    for (int rep = 0; rep < 25; ++rep) {
        double a = rng.uniform(), b = rng.uniform(), c = rng.uniform(), d = rng.uniform();
        const auto dh = drift_h(make_state_h(a, b, c), ph);
        CHECK(std::abs(dh[0] + dh[1] + dh[2]) <= 1e-15 * (1.0 + std::abs(dh[0])));
        const auto db = drift_b(make_state_b(a, b, c, d), pb);
        CHECK(std::abs(db[0] + db[1] + db[2] + db[3]) <= 1e-15 * (1.0 + std::abs(db[0])));
    }
}

TEST_CASE("four-state dynamics reduce to three-state under the parameter mapping") {
    // SigmaB with beta2=0 and M2(0)=0 runs as SigmaH with (beta1, delta1->0,
    // delta2->delta1) on (P, M1, E)
    const SigmaBParams pb{0.6, 0.0, 0.3, 0.9};
    const SigmaHParams ph{0.6, 0.0, 0.3};
    CommunityState sb = make_state_b(0.9, 0.1, 0.0, 0.0);
    CommunityState sh = make_state_h(0.9, 0.1, 0.0);
    const double dt = 1e-3;
    for (int k = 0; k < 5000; ++k) {
        sb = integrate_step(sb, drift_b(sb, pb), diffusion_b(sb, pb), dt, {}, 0.0);
        sh = integrate_step(sh, drift_h(sh, ph), diffusion_h(sh, ph), dt, {}, 0.0);
        CHECK(std::abs(sb.c[0] - sh.c[0]) <= 1e-9);
        CHECK(std::abs(sb.c[1] - sh.c[1]) <= 1e-9);
        CHECK(std::abs(sb.c[3] - sh.c[2]) <= 1e-9);
        CHECK(sb.c[2] == 0.0);
    }
}

TEST_CASE("noise-off pure exit decays exponentially") {
    const SigmaHParams p{0.0, 0.0, 0.1};
    CommunityState s = make_state_h(0.4, 0.5, 0.1);
    const double dt = 1e-3;
    for (int k = 0; k < 10000; ++k)
        s = integrate_step(s, drift_h(s, p), diffusion_h(s, p), dt, {}, 0.0);
    const double expected = 0.5 * std::exp(-0.1 * 10.0);
    CHECK(std::abs(s.c[1] - expected) / expected <= 0.01);
}

TEST_CASE("zero drift and diffusion leave the state unchanged") {
    const CommunityState s = make_state_h(0.3, 0.3, 0.4);
    const auto out = integrate_step(s, Vec4{}, Mat4{}, 0.1, {}, 0.0);
    for (int i = 0; i < 3; ++i) CHECK(out.c[i] == s.c[i]);
}

TEST_CASE("integration rejects non-finite inputs and bad dt") {
    const CommunityState s = make_state_h(0.3, 0.3, 0.4);
    CHECK_THROWS_AS(integrate_step(s, Vec4{}, Mat4{}, 0.0, {}, 0.0),
                    std::invalid_argument);
    Vec4 bad{};
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(integrate_step(s, bad, Mat4{}, 0.1, {}, 0.0), std::invalid_argument);
}

TEST_CASE("ensemble mean of noisy paths tracks the noise-off path") {
    // community of 5000: the nonlinear-drift bias O(scale^2) sits well below
    // the 3-sigma band of 1e4 paths
    const SigmaHParams p{0.8, 0.1, 0.25};
    const double dt = 1e-2;
    const int steps = 500;  // horizon t = 5
    const double noise_scale = 1.0 / std::sqrt(5000.0);

    CommunityState ref = make_state_h(0.9, 0.1, 0.0);
    std::vector<double> ref_m;
    for (int k = 0; k < steps; ++k) {
        ref = integrate_step(ref, drift_h(ref, p), diffusion_h(ref, p), dt, {}, 0.0);
        ref_m.push_back(ref.c[1]);
    }

    const int paths = 10000;
    std::vector<double> mean(steps, 0.0), m2(steps, 0.0);
    for (int run = 0; run < paths; ++run) {
        RngStream rng(derive_seed(99, run));
        CommunityState s = make_state_h(0.9, 0.1, 0.0);
        for (int k = 0; k < steps; ++k) {
            Vec4 noise{rng.normal(), rng.normal(), rng.normal(), 0.0};
            s = integrate_step(s, drift_h(s, p), diffusion_h(s, p), dt,
                               std::span<const double>(noise.data(), 3), noise_scale);
            mean[k] += s.c[1];
            m2[k] += s.c[1] * s.c[1];
        }
    }
    for (int k = 0; k < steps; ++k) {
        mean[k] /= paths;
        const double var = m2[k] / paths - mean[k] * mean[k];
        const double se = std::sqrt(std::max(var, 0.0) / paths);
        CHECK(std::abs(mean[k] - ref_m[k]) <= 3.0 * se + 1e-4);
    }
}

TEST_CASE("chain rates") {
    Model m = two_community_model(2.0);
    // K=2, community 0 active with M=0.3, equal sizes: rate = 2*0.3*0.5
    std::vector<CommunityState> states = {make_state_h(0.7, 0.3, 0.0),
                                          all_potential_state(Dynamics::SigmaH)};
    const auto rates = chain_rates(m, states, 0b01);
    REQUIRE(rates.size() == 1);
    CHECK(rates[0].first == 1);
    CHECK(rates[0].second == doctest::Approx(0.3).epsilon(1e-12));

    // all adopter fractions zero: no transitions
    states[0] = make_state_h(1.0, 0.0, 0.0);
    CHECK(chain_rates(m, states, 0b01).empty());

    // communities with no active neighbor never fire
    Model line = two_community_model(2.0);
    line.community_graph.community_count = 3;
    line.community_graph.sizes = {1000, 1000, 1000};
    line.community_graph.meta_edges = {{0, 1}, {1, 2}};
    std::vector<CommunityState> states3 = {make_state_h(0.7, 0.3, 0.0),
                                           all_potential_state(Dynamics::SigmaH),
                                           all_potential_state(Dynamics::SigmaH)};
    const auto rates3 = chain_rates(line, states3, 0b001);
    REQUIRE(rates3.size() == 1);
    CHECK(rates3[0].first == 1);  // community 2 is not adjacent to an active one
}

TEST_CASE("lambda zero never activates the second community") {
    Model m = two_community_model(0.0);
    const auto tr = simulate(m, {make_state_h(0.95, 0.05, 0.0),
                                 all_potential_state(Dynamics::SigmaH)},
                             0b01, 50.0, 1e-2, 5);
    for (auto q : tr.discrete) CHECK(q == 0b01);
    // inactive community stays all-potential
    for (const auto& row : tr.states) {
        CHECK(row[1].c[0] == 1.0);
        CHECK(row[1].c[1] == 0.0);
    }
}

TEST_CASE("activation is monotone and jumps are logged consistently") {
    Model m = two_community_model(5.0, true);
    const auto tr = simulate(m, {make_state_h(0.95, 0.05, 0.0),
                                 all_potential_state(Dynamics::SigmaH)},
                             0b01, 100.0, 1e-2, 11);
    DiscreteState prev = 0;
    for (auto q : tr.discrete) {
        CHECK((q & prev) == prev);  // bits only flip upward
        prev = q;
    }
    if (tr.discrete.back() == 0b11) {
        REQUIRE(tr.jumps.size() == 1);
        CHECK(tr.jumps[0].community == 1);
        CHECK(tr.jumps[0].source == 0);
        // injection takes mass from the potential pool only
        bool found = false;
        for (std::size_t i = 0; i + 1 < tr.times.size(); ++i) {
            if (tr.discrete[i] == 0b01 && tr.discrete[i + 1] == 0b11) {
                CHECK(tr.states[i + 1][1].c[1] > 0.0);
                CHECK(tr.states[i + 1][1].c[2] == 0.0);
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("per-community coordinate sums stay on the simplex") {
    Model m = two_community_model(3.0, true);
    RngStream rng(17);
    run_path(m, {make_state_h(0.9, 0.1, 0.0), all_potential_state(Dynamics::SigmaH)},
             0b01, 20.0, 1e-2, rng,
             [&](double, const std::vector<CommunityState>& states, DiscreteState) {
                 for (const auto& s : states) CHECK(std::abs(s.sum() - 1.0) <= 1e-9);
                 return true;
             });
}

TEST_CASE("simulation is reproducible bit for bit") {
    Model m = two_community_model(2.0, true);
    const std::vector<CommunityState> init = {make_state_h(0.95, 0.05, 0.0),
                                              all_potential_state(Dynamics::SigmaH)};
    const auto a = simulate(m, init, 0b01, 30.0, 1e-2, 12345);
    const auto b = simulate(m, init, 0b01, 30.0, 1e-2, 12345);
    REQUIRE(a.times.size() == b.times.size());
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        CHECK(a.discrete[i] == b.discrete[i]);
        for (std::size_t j = 0; j < a.states[i].size(); ++j)
            for (int c = 0; c < 3; ++c) CHECK(a.states[i][j].c[c] == b.states[i][j].c[c]);
    }
    CHECK(trajectory_csv(a, m.kind) == trajectory_csv(b, m.kind));
}

TEST_CASE("subcritical dynamics drive membership to extinction") {
    // R = beta/delta2 < 1, noise off: after a burn-in M decreases to ~0
    for (double beta : {0.05, 0.2, 0.45}) {
        Model m = two_community_model(0.0);
        m.params_h = {{beta, 0.05, 0.5}};
        const auto tr = simulate(m, {make_state_h(0.8, 0.2, 0.0),
                                     all_potential_state(Dynamics::SigmaH)},
                                 0b01, 60.0, 1e-2, 3, 10);
        double prev = 1.0;
        for (std::size_t i = 1; i < tr.times.size(); ++i) {
            const double mval = tr.states[i][0].c[1];
            CHECK(mval <= prev + 1e-12);
            prev = mval;
        }
        CHECK(tr.states.back()[0].c[1] <= 1e-4);
    }
}

TEST_CASE("run_path validates inputs") {
    Model m = two_community_model(1.0);
    RngStream rng(1);
    auto noop = [](double, const std::vector<CommunityState>&, DiscreteState) {
        return true;
    };
    // inactive community carrying adopters contradicts the discrete state
    CHECK_THROWS_AS(run_path(m, {make_state_h(0.9, 0.1, 0.0), make_state_h(0.9, 0.1, 0.0)},
                             0b01, 10.0, 1e-2, rng, noop),
                    std::invalid_argument);
    // dt must be positive and below the horizon
    CHECK_THROWS_AS(run_path(m, {make_state_h(0.9, 0.1, 0.0),
                                 all_potential_state(Dynamics::SigmaH)},
                             0b01, 1.0, 2.0, rng, noop),
                    std::invalid_argument);
    Model bad = m;
    bad.lambda = -1.0;
    CHECK_THROWS_AS(run_path(bad, {make_state_h(0.9, 0.1, 0.0),
                                   all_potential_state(Dynamics::SigmaH)},
                             0b01, 10.0, 1e-2, rng, noop),
                    std::invalid_argument);
}

TEST_CASE("exogenous forcing enters through the gain vector") {
    Model m = two_community_model(0.0);
    m.params_h = {{0.0, 0.0, 0.0}};
    ExogenousInput input;
    input.times = {0.0, 5.0};
    input.values = {0.0, 1.0};  // switch on at t=5
    input.gains = {Vec4{-0.01, 0.01, 0.0, 0.0}, Vec4{}};
    m.input = input;
    const auto tr = simulate(m, {make_state_h(0.99, 0.01, 0.0),
                                 all_potential_state(Dynamics::SigmaH)},
                             0b01, 10.0, 1e-2, 7, 50);
    // flat until the switch, rising afterwards
    double m_at_5 = 0.0, m_at_10 = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        if (std::abs(tr.times[i] - 5.0) < 0.26) m_at_5 = tr.states[i][0].c[1];
        if (i + 1 == tr.times.size()) m_at_10 = tr.states[i][0].c[1];
    }
    CHECK(m_at_5 == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(m_at_10 > 0.05);
}

}  // TEST_SUITE
