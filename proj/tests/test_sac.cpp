#include <doctest.h>

#include <cmath>
#include <vector>

#include "bfssl/errors.hpp"
#include "bfssl/mathutil.hpp"
#include "bfssl/sac.hpp"
#include "oracles.hpp"

using namespace bfssl;
using namespace bfssl::sac_detail;

namespace {

SacConfig small_cfg() {
    SacConfig cfg;
    cfg.hidden_layers = 1;
    cfg.hidden_width = 16;
    cfg.batch_size = 4;
    cfg.replay_capacity = 64;
    return cfg;
}

// One-dimensional agent with a hand-set policy head: mean = w*s + b_m,
// log-std fixed at b_ls.
SacAgent scalar_agent(double w, double b_mean, double b_logstd, const SacConfig& cfg_in) {
    SacConfig cfg = cfg_in;
    cfg.hidden_layers = 1;
    cfg.hidden_width = 1;
    Rng init(1);
    SacAgent agent(1, BoundsSpec{{-2.0}, {3.0}}, cfg, init);
    // dims {1,1,2}: hidden w,b then output 2x1 w and 2 b
    std::vector<double> params{1.0, 0.0, w, 0.0, b_mean, b_logstd};
    agent.actor().set_params(params);
    return agent;
}

std::vector<double> flatten(const MlpNet::Grads& g) {
    std::vector<double> out;
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        out.insert(out.end(), g.w[l].begin(), g.w[l].end());
        out.insert(out.end(), g.b[l].begin(), g.b[l].end());
    }
    return out;
}

}  // namespace

TEST_CASE("sampled actions always respect their bounds") {
    SacConfig cfg = small_cfg();
    Rng init(2);
    BoundsSpec bounds{{0.003, 0.003, 5e7, 5e7}, {1.0, 1.0, 4e8, 4e8}};
    SacAgent agent(4, bounds, cfg, init);
    Rng rng(3);
    std::vector<double> state{0.1, 0.2, 0.3, 0.4};
    for (int i = 0; i < 100000; ++i) {
        SacAction a = agent.select_action(state, false, rng);
        for (int d = 0; d < 4; ++d) {
            REQUIRE(a.physical[d] >= bounds.lo[d]);
            REQUIRE(a.physical[d] <= bounds.hi[d]);
            REQUIRE(a.squashed[d] > -1.0);
            REQUIRE(a.squashed[d] < 1.0);
        }
    }
}

TEST_CASE("deterministic mode reproduces the squashed mean exactly") {
    SacAgent agent = scalar_agent(0.7, 0.25, -0.4, small_cfg());
    Rng rng(4);
    std::vector<double> state{0.5};
    SacAction first = agent.select_action(state, true, rng);
    for (int i = 0; i < 10; ++i) {
        SacAction again = agent.select_action(state, true, rng);
        CHECK(again.physical[0] == first.physical[0]);
    }
    double mean = 0.7 * 0.5 + 0.25;
    double expect = -2.0 + 0.5 * (std::tanh(mean) + 1.0) * 5.0;
    CHECK(first.physical[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("log probability equals the analytic squashed-gaussian density") {
    SacAgent agent = scalar_agent(0.0, 0.3, -0.5, small_cfg());
    Rng rng(5);
    std::vector<double> state{0.0};
    double mean = 0.3, sigma = std::exp(-0.5);
    for (int i = 0; i < 1000; ++i) {
        SacAction a = agent.select_action(state, false, rng);
        double u = a.squashed[0];
        double z = std::atanh(u);
        double density = normal_pdf((z - mean) / sigma) / sigma / (1.0 - u * u);
        CHECK(oracles::rel_error(std::exp(a.log_prob), density, 1e-12) <= 1e-8);
    }
}

TEST_CASE("sampled actions pass a chi-square test against the density") {
    SacAgent agent = scalar_agent(0.0, 0.3, -0.5, small_cfg());
    Rng rng(6);
    std::vector<double> state{0.0};
    const int bins = 40, n = 100000;
    double mean = 0.3, sigma = std::exp(-0.5);

    // equal-probability bins in pre-squash space
    std::vector<double> edges(bins + 1);
    edges[0] = -1e18;
    edges[bins] = 1e18;
    for (int k = 1; k < bins; ++k)
        edges[k] = mean + sigma * normal_quantile(double(k) / bins);

    std::vector<int> counts(bins, 0);
    for (int i = 0; i < n; ++i) {
        double z = std::atanh(agent.select_action(state, false, rng).squashed[0]);
        int k = int(std::lower_bound(edges.begin() + 1, edges.end(), z) - (edges.begin() + 1));
        ++counts[k];
    }
    double expected = double(n) / bins;
    double chi2 = 0.0;
    for (int k = 0; k < bins; ++k)
        chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
    CHECK(chi2 < 72.055);  // 0.999 quantile, 39 dof
}

TEST_CASE("reward composes cost, power floor penalty and iteration bonus") {
    CostBreakdown costs;
    costs.objective = 3.5;
    double p_min = 0.01;

    std::vector<double> floors{0.01, 0.01};
    std::vector<int> iters{0, 0};
    CHECK(sac_reward(costs, floors, iters, 0.05, 5e-5, p_min) == doctest::Approx(-3.5));

    std::vector<int> more{1, 0};
    double base = sac_reward(costs, floors, iters, 0.05, 5e-5, p_min);
    CHECK(sac_reward(costs, floors, more, 0.05, 5e-5, p_min) ==
          doctest::Approx(base + 5e-5).epsilon(1e-12));

    std::vector<double> high{0.21, 0.11};
    CHECK(sac_reward(costs, high, iters, 0.05, 5e-5, p_min) ==
          doctest::Approx(-3.5 - 0.05 * 0.30).epsilon(1e-12));
}

TEST_CASE("critic targets: no bootstrap at gamma zero") {
    SacConfig cfg = small_cfg();
    Rng init(7);
    SacAgent agent(1, BoundsSpec{{-1.0}, {1.0}}, cfg, init);
    Transition t1{{0.1}, {0.0}, 2.5, {0.2}};
    Transition t2{{0.3}, {0.0}, -1.0, {0.4}};
    std::vector<const Transition*> batch{&t1, &t2};
    Rng rng(8);
    auto targets = critic_targets(batch, agent.actor(), agent.target1(), agent.target2(), 0.3,
                                  0.0, cfg, rng);
    CHECK(targets[0] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(targets[1] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("critic targets replicate a hand evaluation") {
    SacConfig cfg = small_cfg();
    // actor head: mean = 0.8*s + 0.1, log-std = -1.0
    SacAgent agent = scalar_agent(0.8, 0.1, -1.0, cfg);
    // target critics: linear in (s, u), identity activation
    MlpNet q1({2, 1}, {Act::identity});
    q1.set_params(std::vector<double>{0.5, -0.3, 0.2});  // 0.5 s - 0.3 u + 0.2
    MlpNet q2({2, 1}, {Act::identity});
    q2.set_params(std::vector<double>{-0.1, 0.7, 0.0});  // -0.1 s + 0.7 u

    Transition t1{{0.1}, {0.0}, 1.0, {0.5}};
    Transition t2{{0.3}, {0.0}, -0.5, {-0.3}};
    std::vector<const Transition*> batch{&t1, &t2};

    double alpha = 0.2, gamma = 0.9;
    Rng rng(9);
    auto got = critic_targets(batch, agent.actor(), q1, q2, alpha, gamma, cfg, rng);

    // independent evaluation with a cloned stream; the actor's single hidden
    // unit is relu(s)
    Rng clone(9);
    for (int m = 0; m < 2; ++m) {
        const Transition& tr = *batch[m];
        double eps = clone.normal();
        double s = tr.next_state[0];
        double mean = 0.8 * std::max(s, 0.0) + 0.1;
        double sigma = std::exp(-1.0);
        double z = mean + sigma * eps;
        double u = std::tanh(z);
        double log_pi = -0.5 * eps * eps - (-1.0) - 0.5 * std::log(2.0 * M_PI) -
                        std::log(1.0 - u * u);
        double qa = 0.5 * s - 0.3 * u + 0.2;
        double qb = -0.1 * s + 0.7 * u;
        double want = tr.reward + gamma * (std::min(qa, qb) - alpha * log_pi);
        CHECK(oracles::rel_error(got[m], want) <= 1e-12);
    }
}

TEST_CASE("critic update: perfect fit means zero gradient, otherwise hand formula") {
    // linear critic, single sample
    MlpNet critic({2, 1}, {Act::identity});
    critic.set_params(std::vector<double>{0.4, -0.2, 0.1});
    Transition t{{0.5}, {0.3}, 0.0, {0.0}};
    std::vector<const Transition*> batch{&t};
    double q = 0.4 * 0.5 - 0.2 * 0.3 + 0.1;

    // targets equal the current prediction: nothing moves
    MlpNet::Grads g = critic.make_grads();
    double loss0 = critic_loss_and_grad(critic, batch, std::vector<double>{q}, g);
    CHECK(loss0 == doctest::Approx(0.0));
    for (double v : flatten(g)) CHECK(v == doctest::Approx(0.0));

    // otherwise the parameters move toward the target by lr*2*(t-q)*dq/dw
    double target = q + 1.5;
    MlpNet::Grads g2 = critic.make_grads();
    double loss1 = critic_loss_and_grad(critic, batch, std::vector<double>{target}, g2);
    CHECK(loss1 == doctest::Approx(2.25));
    double lr = 0.01;
    MlpNet updated = critic;
    updated.apply_gradient(g2, lr);
    auto p0 = critic.params();
    auto p1 = updated.params();
    CHECK(p1[0] - p0[0] == doctest::Approx(lr * 2.0 * 1.5 * 0.5).epsilon(1e-12));
    CHECK(p1[1] - p0[1] == doctest::Approx(lr * 2.0 * 1.5 * 0.3).epsilon(1e-12));
    CHECK(p1[2] - p0[2] == doctest::Approx(lr * 2.0 * 1.5 * 1.0).epsilon(1e-12));
}

TEST_CASE("critic loss gradient matches finite differences") {
    Rng rng(10);
    MlpNet critic({3, 8, 1}, {Act::tanh_act, Act::identity});
    critic.init_random(rng);
    Transition t1{{0.2, -0.4}, {0.6}, 0.0, {0.0, 0.0}};
    Transition t2{{-0.1, 0.9}, {-0.2}, 0.0, {0.0, 0.0}};
    std::vector<const Transition*> batch{&t1, &t2};
    std::vector<double> targets{0.7, -0.3};

    MlpNet::Grads g = critic.make_grads();
    critic_loss_and_grad(critic, batch, targets, g);
    std::vector<double> analytic = flatten(g);

    auto loss_of = [&](std::span<const double> p) {
        MlpNet probe({3, 8, 1}, {Act::tanh_act, Act::identity});
        probe.set_params(p);
        MlpNet::Grads scratch = probe.make_grads();
        return critic_loss_and_grad(probe, batch, targets, scratch);
    };
    std::vector<double> params = critic.params();
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double fd = oracles::central_diff(loss_of, params, i, 1e-5);
        worst = std::max(worst, oracles::rel_error(analytic[i], fd, 1e-6));
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("actor update: no signal means no gradient") {
    SacConfig cfg = small_cfg();
    Rng init(11);
    SacAgent agent(2, BoundsSpec{{-1.0, -1.0}, {1.0, 1.0}}, cfg, init);
    Transition t{{0.1, 0.2}, {0.0, 0.0}, 0.0, {0.0, 0.0}};
    std::vector<const Transition*> batch{&t};
    std::vector<std::vector<double>> eps{{0.3, -0.7}};

    CriticEval flat = [](std::span<const double>, std::span<const double>,
                         std::span<double> dq) {
        for (double& v : dq) v = 0.0;
        return 5.0;
    };
    MlpNet::Grads g = agent.actor().make_grads();
    actor_loss_and_grad(agent.actor(), batch, eps, flat, 0.0, cfg, g);
    for (double v : flatten(g)) CHECK(v == 0.0);
}

TEST_CASE("actor loss gradient matches finite differences") {
    SacConfig cfg = small_cfg();
    Rng rng(12);
    MlpNet actor({2, 8, 4}, {Act::tanh_act, Act::identity});
    actor.init_random(rng);
    MlpNet critic({4, 8, 1}, {Act::tanh_act, Act::identity});
    critic.init_random(rng);

    Transition t1{{0.2, -0.5}, {0.0, 0.0}, 0.0, {0.0, 0.0}};
    Transition t2{{-0.8, 0.1}, {0.0, 0.0}, 0.0, {0.0, 0.0}};
    std::vector<const Transition*> batch{&t1, &t2};
    std::vector<std::vector<double>> eps{{0.4, -1.2}, {0.9, 0.3}};
    double alpha = 0.3;

    CriticEval eval = [&critic](std::span<const double> s, std::span<const double> u,
                                std::span<double> dq) {
        MlpNet::Workspace ws;
        std::vector<double> input(s.begin(), s.end());
        input.insert(input.end(), u.begin(), u.end());
        double q = critic.forward(input, ws)[0];
        MlpNet::Grads scratch = critic.make_grads();
        std::vector<double> dinput;
        double upstream = 1.0;
        critic.backward(ws, std::span<const double>(&upstream, 1), scratch, &dinput);
        for (std::size_t i = 0; i < dq.size(); ++i) dq[i] = dinput[s.size() + i];
        return q;
    };

    MlpNet::Grads g = actor.make_grads();
    actor_loss_and_grad(actor, batch, eps, eval, alpha, cfg, g);
    std::vector<double> analytic = flatten(g);

    auto loss_of = [&](std::span<const double> p) {
        MlpNet probe({2, 8, 4}, {Act::tanh_act, Act::identity});
        probe.set_params(p);
        MlpNet::Grads scratch = probe.make_grads();
        return actor_loss_and_grad(probe, batch, eps, eval, alpha, cfg, scratch);
    };
    std::vector<double> params = actor.params();
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double fd = oracles::central_diff(loss_of, params, i, 1e-5);
        worst = std::max(worst, oracles::rel_error(analytic[i], fd, 1e-6));
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("actor chases the peak of an analytic critic") {
    SacConfig cfg = small_cfg();
    Rng init(13);
    SacAgent agent(1, BoundsSpec{{-1.0}, {1.0}}, cfg, init);
    double u_star = 0.6;
    CriticEval bowl = [u_star](std::span<const double>, std::span<const double> u,
                               std::span<double> dq) {
        dq[0] = -2.0 * (u[0] - u_star);
        return -(u[0] - u_star) * (u[0] - u_star);
    };

    Transition t{{0.0}, {0.0}, 0.0, {0.0}};
    std::vector<const Transition*> batch{&t};
    Rng rng(14);
    for (int step = 0; step < 5000; ++step) {
        std::vector<std::vector<double>> eps{{rng.normal()}};
        MlpNet::Grads g = agent.actor().make_grads();
        actor_loss_and_grad(agent.actor(), batch, eps, bowl, 0.0, cfg, g);
        agent.actor().apply_gradient(g, 1e-2);
    }
    SacAction a = agent.select_action(std::vector<double>{0.0}, true, rng);
    CHECK(std::abs(a.squashed[0] - u_star) < 0.05);
}

TEST_CASE("entropy pressure alone widens a near-deterministic policy") {
    SacConfig cfg = small_cfg();
    // start tight: log-std -2, far below the squashed-gaussian entropy peak
    SacAgent agent = scalar_agent(0.0, 0.1, -2.0, cfg);
    CriticEval silent = [](std::span<const double>, std::span<const double>,
                           std::span<double> dq) {
        dq[0] = 0.0;
        return 0.0;
    };
    std::vector<double> state{0.0};
    MlpNet::Workspace ws;
    auto log_std_of = [&]() {
        std::vector<double> eps{0.0};
        return run_policy(agent.actor(), state, eps, cfg, ws).log_std[0];
    };
    double before = log_std_of();

    Transition t{state, {0.0}, 0.0, state};
    std::vector<const Transition*> batch{&t};
    Rng rng(17);
    for (int step = 0; step < 500; ++step) {
        std::vector<std::vector<double>> eps{{rng.normal()}};
        MlpNet::Grads g = agent.actor().make_grads();
        actor_loss_and_grad(agent.actor(), batch, eps, silent, 0.5, cfg, g);
        agent.actor().apply_gradient(g, 1e-2);
    }
    CHECK(log_std_of() > before);
}

TEST_CASE("temperature update: fixed point, direction, positivity") {
    double target_h = -2.0;
    double lr = 1e-3;
    double log_alpha = std::log(0.2);

    // exactly at the fixed point: mean log pi = -target_H
    CHECK(alpha_step(log_alpha, 2.0, target_h, lr) == doctest::Approx(log_alpha));
    // policy too deterministic (log pi above -target_H): alpha grows
    CHECK(alpha_step(log_alpha, 2.5, target_h, lr) > log_alpha);
    CHECK(alpha_step(log_alpha, 1.5, target_h, lr) < log_alpha);

    // stays positive through many one-sided updates (log-space)
    double la = std::log(0.2);
    for (int i = 0; i < 20000; ++i) la = alpha_step(la, -5.0, 2.0, 1e-2);
    CHECK(std::exp(la) > 0.0);
}

TEST_CASE("default target entropy is minus the action dimension") {
    SacConfig cfg = small_cfg();
    Rng init(18);
    SacAgent agent(3, BoundsSpec{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}, cfg, init);
    CHECK(agent.target_entropy() == doctest::Approx(-3.0));

    SacConfig custom = cfg;
    custom.target_entropy = -1.25;
    SacAgent agent2(3, BoundsSpec{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}, custom, init);
    CHECK(agent2.target_entropy() == doctest::Approx(-1.25));
}

TEST_CASE("replay buffer wraps at capacity and samples without replacement") {
    ReplayBuffer buf(8);
    for (int i = 0; i < 20; ++i) {
        buf.push(Transition{{double(i)}, {0.0}, double(i), {0.0}});
        CHECK(buf.size() <= 8);
    }
    CHECK(buf.size() == 8);

    Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        auto batch = buf.sample(5, rng);
        CHECK(batch.size() == 5);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            // stored rewards 12..19 after wrap
            CHECK(batch[i]->reward >= 12.0);
            for (std::size_t j = i + 1; j < batch.size(); ++j) CHECK(batch[i] != batch[j]);
        }
    }
    CHECK_THROWS_AS(buf.sample(9, rng), internal_error);
}

TEST_CASE("full update keeps alpha positive and refreshes targets on cadence") {
    SacConfig cfg = small_cfg();
    cfg.target_update_every = 3;
    cfg.lr = 1e-3;
    Rng init(20);
    SacAgent agent(2, BoundsSpec{{-1.0, -1.0}, {1.0, 1.0}}, cfg, init);

    Rng rng(21);
    for (int i = 0; i < 16; ++i) {
        Transition t{{rng.uniform01(), rng.uniform01()},
                     {rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)},
                     rng.uniform(-1.0, 0.0),
                     {rng.uniform01(), rng.uniform01()}};
        agent.observe(std::move(t));
    }
    REQUIRE(agent.ready_to_update());
    for (int i = 1; i <= 7; ++i) {
        UpdateStats stats = agent.update(rng);
        CHECK(stats.alpha > 0.0);
        CHECK(stats.critic1_loss >= 0.0);
        CHECK(stats.critic2_loss >= 0.0);
        CHECK(stats.targets_refreshed == (i % 3 == 0));
    }
    CHECK(agent.update_iterations() == 7);
}
