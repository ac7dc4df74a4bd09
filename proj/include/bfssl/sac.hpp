#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "bfssl/kkt.hpp"
#include "bfssl/mlp.hpp"
#include "bfssl/rng.hpp"

namespace bfssl {

// Soft actor-critic over the allocation problem: a squashed-Gaussian policy,
// twin critics with twin targets, adaptive entropy temperature, and a uniform
// replay buffer. All updates are plain gradient descent with a fixed step.
struct SacConfig {
    int hidden_layers = 2;
    int hidden_width = 64;
    double lr = 3e-4;
    double gamma = 0.99;
    double delta_soft = 0.001;       // target mixing factor
    int batch_size = 256;
    std::size_t replay_capacity = 100000;
    int target_update_every = 80;    // update iterations between target refreshes
    double alpha_init = 0.2;
    double target_entropy = std::numeric_limits<double>::quiet_NaN();  // NaN: -action_dim
    double log_std_min = -20.0;
    double log_std_max = 2.0;

    void validate() const;
};

// Physical interval per action dimension; the policy's tanh output is mapped
// affinely onto it.
struct BoundsSpec {
    std::vector<double> lo;
    std::vector<double> hi;

    int dim() const { return static_cast<int>(lo.size()); }
};

struct SacAction {
    std::vector<double> physical;  // env units
    std::vector<double> squashed;  // tanh output in [-1,1], what critics consume
    std::vector<double> raw;       // pre-squash gaussian values
    double log_prob = 0.0;         // density in squashed space, tanh-corrected
};

struct Transition {
    std::vector<double> state;
    std::vector<double> action;    // squashed
    double reward = 0.0;
    std::vector<double> next_state;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }

    // Uniform without replacement; requires count <= size.
    std::vector<const Transition*> sample(int count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> store_;
};

// Evaluates Q(s, u) and fills dQ/du. Lets tests drive the actor update with
// an analytic critic.
using CriticEval =
    std::function<double(std::span<const double>, std::span<const double>, std::span<double>)>;

struct UpdateStats {
    double critic1_loss = 0.0;
    double critic2_loss = 0.0;
    double actor_loss = 0.0;
    double alpha = 0.0;
    double mean_log_pi = 0.0;
    bool targets_refreshed = false;
};

class SacAgent {
public:
    SacAgent(int state_dim, BoundsSpec bounds, SacConfig cfg, Rng& init_rng);

    SacAction select_action(std::span<const double> state, bool deterministic, Rng& rng) const;

    void observe(Transition t) { buffer_.push(std::move(t)); }
    bool ready_to_update() const { return buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size); }

    // One update iteration per Algorithm order: temperature, actor, critics,
    // then targets on the configured cadence.
    UpdateStats update(Rng& rng);

    double alpha() const;
    double target_entropy() const { return target_entropy_; }
    long update_iterations() const { return update_iterations_; }
    int state_dim() const { return state_dim_; }
    int action_dim() const { return bounds_.dim(); }
    const BoundsSpec& bounds() const { return bounds_; }
    const SacConfig& config() const { return cfg_; }
    const ReplayBuffer& replay() const { return buffer_; }

    MlpNet& actor() { return actor_; }
    const MlpNet& actor() const { return actor_; }
    MlpNet& critic1() { return critic1_; }
    const MlpNet& critic1() const { return critic1_; }
    MlpNet& critic2() { return critic2_; }
    const MlpNet& critic2() const { return critic2_; }
    MlpNet& target1() { return target1_; }
    const MlpNet& target1() const { return target1_; }
    MlpNet& target2() { return target2_; }
    const MlpNet& target2() const { return target2_; }
    void set_log_alpha(double v) { log_alpha_ = v; }
    double log_alpha() const { return log_alpha_; }

private:
    int state_dim_;
    BoundsSpec bounds_;
    SacConfig cfg_;
    double target_entropy_;
    MlpNet actor_, critic1_, critic2_, target1_, target2_;
    MlpNet::AdamState actor_opt_, critic1_opt_, critic2_opt_;
    double log_alpha_;
    long update_iterations_ = 0;
    ReplayBuffer buffer_;
};

namespace sac_detail {

// Squashed-Gaussian head shared by action selection and the update math.
struct PolicySample {
    std::vector<double> mean, log_std, raw, squashed;
    std::vector<bool> clamped;     // log-std hit its clamp
    double log_prob = 0.0;
};

PolicySample run_policy(const MlpNet& actor, std::span<const double> state,
                        std::span<const double> eps, const SacConfig& cfg,
                        MlpNet::Workspace& ws);

// Mean of alpha*log_pi - Q_min over the batch with reparameterized actions;
// parameter gradients accumulate into g. Deterministic given eps draws.
double actor_loss_and_grad(const MlpNet& actor, std::span<const Transition* const> batch,
                           const std::vector<std::vector<double>>& eps, const CriticEval& critic,
                           double alpha, const SacConfig& cfg, MlpNet::Grads& g);

// Mean squared TD error for one critic; gradients accumulate into g.
double critic_loss_and_grad(const MlpNet& critic, std::span<const Transition* const> batch,
                            std::span<const double> targets, MlpNet::Grads& g);

// Bellman targets r + gamma*(min targetQ - alpha*log_pi) with fresh next actions.
std::vector<double> critic_targets(std::span<const Transition* const> batch, const MlpNet& actor,
                                   const MlpNet& target1, const MlpNet& target2, double alpha,
                                   double gamma, const SacConfig& cfg, Rng& rng);

// Log-space temperature step for J(alpha) = mean[-alpha*(log_pi + target_H)].
double alpha_step(double log_alpha, double mean_log_pi, double target_entropy, double lr);

// min over the two critics, with dQ/du of the active one.
CriticEval min_critic_eval(const MlpNet& critic1, const MlpNet& critic2);

}  // namespace sac_detail

// Reward of one slot: negative weighted cost, a penalty for the power floor
// sitting above p_min, and a bonus per completed local iteration.
double sac_reward(const CostBreakdown& costs, std::span<const double> p_stars,
                  std::span<const int> iteration_counts, double theta1, double theta2,
                  double p_min_w);

}  // namespace bfssl
