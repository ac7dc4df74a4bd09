#include "bfssl/sac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "bfssl/errors.hpp"

namespace bfssl {

void SacConfig::validate() const {
    if (hidden_layers < 1 || hidden_width < 1)
        throw config_error("sac: need at least one hidden layer of width >= 1");
    if (!(lr > 0.0)) throw config_error("sac: learning rate must be > 0");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw config_error("sac: gamma must be in [0,1]");
    if (!(delta_soft > 0.0 && delta_soft <= 1.0))
        throw config_error("sac: delta must be in (0,1]");
    if (batch_size < 1) throw config_error("sac: batch size must be >= 1");
    if (replay_capacity < static_cast<std::size_t>(batch_size))
        throw config_error("sac: replay capacity must be >= batch size");
    if (target_update_every < 1) throw config_error("sac: target cadence must be >= 1");
    if (!(alpha_init > 0.0)) throw config_error("sac: alpha must start positive");
    if (!(log_std_min < log_std_max)) throw config_error("sac: log-std clamp empty");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    store_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (store_.size() < capacity_) {
        store_.push_back(std::move(t));
    } else {
        store_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(int count, Rng& rng) const {
    if (count < 0 || static_cast<std::size_t>(count) > store_.size())
        throw internal_error("replay: batch larger than stored transitions");
    // Floyd's algorithm: uniform subset without replacement.
    std::unordered_set<std::size_t> chosen;
    std::vector<const Transition*> out;
    out.reserve(count);
    std::size_t n = store_.size();
    for (std::size_t j = n - count; j < n; ++j) {
        std::size_t t = rng.next_u64() % (j + 1);
        if (chosen.count(t)) {
            chosen.insert(j);
            out.push_back(&store_[j]);
        } else {
            chosen.insert(t);
            out.push_back(&store_[t]);
        }
    }
    return out;
}

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// log(1 - tanh(z)^2), computed without cancellation.
double log_one_minus_tanh_sq(double z) {
    return 2.0 * (std::log(2.0) - z - softplus(-2.0 * z));
}

std::vector<int> actor_dims(int state_dim, int action_dim, const SacConfig& cfg) {
    std::vector<int> dims{state_dim};
    for (int l = 0; l < cfg.hidden_layers; ++l) dims.push_back(cfg.hidden_width);
    dims.push_back(2 * action_dim);
    return dims;
}

std::vector<int> critic_dims(int state_dim, int action_dim, const SacConfig& cfg) {
    std::vector<int> dims{state_dim + action_dim};
    for (int l = 0; l < cfg.hidden_layers; ++l) dims.push_back(cfg.hidden_width);
    dims.push_back(1);
    return dims;
}

std::vector<Act> net_acts(int hidden_layers) {
    std::vector<Act> acts(hidden_layers, Act::relu);
    acts.push_back(Act::identity);
    return acts;
}

}  // namespace

namespace sac_detail {

PolicySample run_policy(const MlpNet& actor, std::span<const double> state,
                        std::span<const double> eps, const SacConfig& cfg,
                        MlpNet::Workspace& ws) {
    auto out = actor.forward(state, ws);
    int action_dim = actor.output_dim() / 2;
    PolicySample s;
    s.mean.resize(action_dim);
    s.log_std.resize(action_dim);
    s.raw.resize(action_dim);
    s.squashed.resize(action_dim);
    s.clamped.resize(action_dim);
    for (int i = 0; i < action_dim; ++i) {
        double m = out[i];
        double ls = out[action_dim + i];
        if (!std::isfinite(m) || !std::isfinite(ls))
            throw internal_error("sac: non-finite actor output");
        s.clamped[i] = ls < cfg.log_std_min || ls > cfg.log_std_max;
        ls = std::clamp(ls, cfg.log_std_min, cfg.log_std_max);
        double std = std::exp(ls);
        double z = m + std * eps[i];
        double u = std::tanh(z);
        s.mean[i] = m;
        s.log_std[i] = ls;
        s.raw[i] = z;
        s.squashed[i] = u;
        s.log_prob += -0.5 * eps[i] * eps[i] - ls - kHalfLog2Pi - log_one_minus_tanh_sq(z);
    }
    return s;
}

double actor_loss_and_grad(const MlpNet& actor, std::span<const Transition* const> batch,
                           const std::vector<std::vector<double>>& eps, const CriticEval& critic,
                           double alpha, const SacConfig& cfg, MlpNet::Grads& g) {
    int action_dim = actor.output_dim() / 2;
    double total_loss = 0.0;
    MlpNet::Workspace ws;
    std::vector<double> dq_du(action_dim);
    std::vector<double> upstream(2 * action_dim);

    for (std::size_t m = 0; m < batch.size(); ++m) {
        const Transition& tr = *batch[m];
        PolicySample ps = run_policy(actor, tr.state, eps[m], cfg, ws);
        double q = critic(tr.state, ps.squashed, dq_du);
        total_loss += alpha * ps.log_prob - q;

        for (int i = 0; i < action_dim; ++i) {
            double u = ps.squashed[i];
            double one_minus_u2 = 1.0 - u * u;
            double std = std::exp(ps.log_std[i]);
            double se = std * eps[m][i];
            // d(loss)/d(mean): entropy term contributes 2u through the tanh
            // correction, the Q term flows through u.
            upstream[i] = alpha * 2.0 * u - dq_du[i] * one_minus_u2;
            double g_ls = alpha * (-1.0 + 2.0 * u * se) - dq_du[i] * one_minus_u2 * se;
            upstream[action_dim + i] = ps.clamped[i] ? 0.0 : g_ls;
        }
        actor.backward(ws, upstream, g, nullptr);
    }
    double inv_m = 1.0 / static_cast<double>(batch.size());
    g.scale(inv_m);
    return total_loss * inv_m;
}

double critic_loss_and_grad(const MlpNet& critic, std::span<const Transition* const> batch,
                            std::span<const double> targets, MlpNet::Grads& g) {
    double total_loss = 0.0;
    MlpNet::Workspace ws;
    std::vector<double> input;
    for (std::size_t m = 0; m < batch.size(); ++m) {
        const Transition& tr = *batch[m];
        input.assign(tr.state.begin(), tr.state.end());
        input.insert(input.end(), tr.action.begin(), tr.action.end());
        double q = critic.forward(input, ws)[0];
        double err = targets[m] - q;
        total_loss += err * err;
        double upstream = -2.0 * err;
        critic.backward(ws, std::span<const double>(&upstream, 1), g, nullptr);
    }
    double inv_m = 1.0 / static_cast<double>(batch.size());
    g.scale(inv_m);
    return total_loss * inv_m;
}

std::vector<double> critic_targets(std::span<const Transition* const> batch, const MlpNet& actor,
                                   const MlpNet& target1, const MlpNet& target2, double alpha,
                                   double gamma, const SacConfig& cfg, Rng& rng) {
    int action_dim = actor.output_dim() / 2;
    std::vector<double> out(batch.size());
    MlpNet::Workspace ws;
    std::vector<double> eps(action_dim), input;
    for (std::size_t m = 0; m < batch.size(); ++m) {
        const Transition& tr = *batch[m];
        for (double& e : eps) e = rng.normal();
        PolicySample ps = run_policy(actor, tr.next_state, eps, cfg, ws);
        input.assign(tr.next_state.begin(), tr.next_state.end());
        input.insert(input.end(), ps.squashed.begin(), ps.squashed.end());
        double q1 = target1.forward(input, ws)[0];
        double q2 = target2.forward(input, ws)[0];
        double q_hat = std::min(q1, q2) - alpha * ps.log_prob;
        out[m] = tr.reward + gamma * q_hat;
    }
    return out;
}

double alpha_step(double log_alpha, double mean_log_pi, double target_entropy, double lr) {
    // Descends J(log_alpha) = -log_alpha * (mean_log_pi + target_entropy),
    // the log-space form of the temperature objective. Same fixed point and
    // direction as J(alpha) = -alpha*(...), but the step does not scale with
    // alpha itself, so the update cannot run away once alpha grows.
    return log_alpha + lr * (mean_log_pi + target_entropy);
}

CriticEval min_critic_eval(const MlpNet& critic1, const MlpNet& critic2) {
    return [&critic1, &critic2](std::span<const double> state, std::span<const double> u,
                                std::span<double> dq_du) {
        MlpNet::Workspace ws;
        std::vector<double> input(state.begin(), state.end());
        input.insert(input.end(), u.begin(), u.end());
        double q1 = critic1.forward(input, ws)[0];
        MlpNet::Workspace ws2;
        double q2 = critic2.forward(input, ws2)[0];
        const MlpNet& active = q1 <= q2 ? critic1 : critic2;
        const MlpNet::Workspace& active_ws = q1 <= q2 ? ws : ws2;
        MlpNet::Grads scratch = active.make_grads();
        std::vector<double> dinput;
        double upstream = 1.0;
        active.backward(active_ws, std::span<const double>(&upstream, 1), scratch, &dinput);
        for (std::size_t i = 0; i < dq_du.size(); ++i) dq_du[i] = dinput[state.size() + i];
        return std::min(q1, q2);
    };
}

}  // namespace sac_detail

SacAgent::SacAgent(int state_dim, BoundsSpec bounds, SacConfig cfg, Rng& init_rng)
    : state_dim_(state_dim),
      bounds_(std::move(bounds)),
      cfg_(cfg),
      buffer_(cfg.replay_capacity) {
    cfg_.validate();
    if (bounds_.lo.size() != bounds_.hi.size() || bounds_.lo.empty())
        throw config_error("sac: malformed action bounds");
    for (std::size_t i = 0; i < bounds_.lo.size(); ++i)
        if (!(bounds_.lo[i] < bounds_.hi[i]))
            throw config_error("sac: action bound lo >= hi");

    int action_dim = bounds_.dim();
    target_entropy_ = std::isnan(cfg_.target_entropy) ? -static_cast<double>(action_dim)
                                                      : cfg_.target_entropy;
    actor_ = MlpNet(actor_dims(state_dim, action_dim, cfg_), net_acts(cfg_.hidden_layers));
    critic1_ = MlpNet(critic_dims(state_dim, action_dim, cfg_), net_acts(cfg_.hidden_layers));
    critic2_ = MlpNet(critic_dims(state_dim, action_dim, cfg_), net_acts(cfg_.hidden_layers));
    actor_.init_random(init_rng);
    critic1_.init_random(init_rng);
    critic2_.init_random(init_rng);
    target1_ = critic1_;
    target2_ = critic2_;
    actor_opt_ = actor_.make_adam_state();
    critic1_opt_ = critic1_.make_adam_state();
    critic2_opt_ = critic2_.make_adam_state();
    log_alpha_ = std::log(cfg_.alpha_init);
}

double SacAgent::alpha() const {
    return std::exp(log_alpha_);
}

SacAction SacAgent::select_action(std::span<const double> state, bool deterministic,
                                  Rng& rng) const {
    if (static_cast<int>(state.size()) != state_dim_)
        throw internal_error("sac: state dimension mismatch");
    int action_dim = bounds_.dim();
    std::vector<double> eps(action_dim, 0.0);
    if (!deterministic)
        for (double& e : eps) e = rng.normal();

    MlpNet::Workspace ws;
    sac_detail::PolicySample ps = sac_detail::run_policy(actor_, state, eps, cfg_, ws);

    SacAction a;
    a.squashed = ps.squashed;
    a.raw = ps.raw;
    a.log_prob = ps.log_prob;
    a.physical.resize(action_dim);
    for (int i = 0; i < action_dim; ++i) {
        a.physical[i] =
            bounds_.lo[i] + 0.5 * (ps.squashed[i] + 1.0) * (bounds_.hi[i] - bounds_.lo[i]);
    }
    return a;
}

UpdateStats SacAgent::update(Rng& rng) {
    if (!ready_to_update()) throw internal_error("sac: update before buffer reached batch size");
    auto batch = buffer_.sample(cfg_.batch_size, rng);
    int action_dim = bounds_.dim();
    UpdateStats stats;

    // temperature
    {
        MlpNet::Workspace ws;
        std::vector<double> eps(action_dim);
        double mean_log_pi = 0.0;
        for (const Transition* tr : batch) {
            for (double& e : eps) e = rng.normal();
            mean_log_pi += sac_detail::run_policy(actor_, tr->state, eps, cfg_, ws).log_prob;
        }
        mean_log_pi /= static_cast<double>(batch.size());
        log_alpha_ = sac_detail::alpha_step(log_alpha_, mean_log_pi, target_entropy_, cfg_.lr);
        stats.mean_log_pi = mean_log_pi;
    }
    stats.alpha = alpha();

    // actor
    {
        std::vector<std::vector<double>> eps(batch.size(), std::vector<double>(action_dim));
        for (auto& row : eps)
            for (double& e : row) e = rng.normal();
        MlpNet::Grads g = actor_.make_grads();
        stats.actor_loss = sac_detail::actor_loss_and_grad(
            actor_, batch, eps, sac_detail::min_critic_eval(critic1_, critic2_), alpha(), cfg_, g);
        actor_.apply_adam(g, cfg_.lr, actor_opt_);
    }

    // critics
    {
        std::vector<double> targets = sac_detail::critic_targets(batch, actor_, target1_, target2_,
                                                                 alpha(), cfg_.gamma, cfg_, rng);
        MlpNet::Grads g1 = critic1_.make_grads();
        stats.critic1_loss = sac_detail::critic_loss_and_grad(critic1_, batch, targets, g1);
        critic1_.apply_adam(g1, cfg_.lr, critic1_opt_);

        MlpNet::Grads g2 = critic2_.make_grads();
        stats.critic2_loss = sac_detail::critic_loss_and_grad(critic2_, batch, targets, g2);
        critic2_.apply_adam(g2, cfg_.lr, critic2_opt_);
    }

    ++update_iterations_;
    if (update_iterations_ % cfg_.target_update_every == 0) {
        soft_update(target1_, critic1_, cfg_.delta_soft);
        soft_update(target2_, critic2_, cfg_.delta_soft);
        stats.targets_refreshed = true;
    }
    return stats;
}

double sac_reward(const CostBreakdown& costs, std::span<const double> p_stars,
                  std::span<const int> iteration_counts, double theta1, double theta2,
                  double p_min_w) {
    double floor_penalty = 0.0;
    for (double p : p_stars) floor_penalty += p - p_min_w;
    double iter_bonus = 0.0;
    for (int n : iteration_counts) iter_bonus += n;
    return -(costs.objective + theta1 * floor_penalty) + theta2 * iter_bonus;
}

}  // namespace bfssl
