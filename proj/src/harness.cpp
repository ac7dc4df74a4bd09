#include "bfssl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "bfssl/errors.hpp"
#include "bfssl/mathutil.hpp"
#include "bfssl/pso.hpp"

namespace bfssl {

RunMode run_mode_from_name(const std::string& name) {
    if (name == "train") return RunMode::train;
    if (name == "test") return RunMode::test;
    if (name == "pso") return RunMode::baseline_pso;
    if (name == "uniform-agg") return RunMode::baseline_uniform_agg;
    if (name == "drop-agg") return RunMode::baseline_drop_agg;
    if (name == "random-alloc") return RunMode::baseline_random_alloc;
    throw config_error("unknown run mode '" + name + "'");
}

std::string run_mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::train: return "train";
        case RunMode::test: return "test";
        case RunMode::baseline_pso: return "pso";
        case RunMode::baseline_uniform_agg: return "uniform-agg";
        case RunMode::baseline_drop_agg: return "drop-agg";
        case RunMode::baseline_random_alloc: return "random-alloc";
    }
    return "train";
}

long slot_to_round(int episode, int slot, int slots_per_episode) {
    if (slot < 1 || slot > slots_per_episode || episode < 1)
        throw internal_error("slot_to_round: slot/episode out of range");
    return static_cast<long>(episode - 1) * slots_per_episode + slot;
}

std::string metrics_csv_header() {
    return "episode,slot,round,objective,total_energy_j,max_delay_s,reward,"
           "total_iterations,success_count,mean_blur,global_loss";
}

std::string metrics_csv_line(const MetricsRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%d,%d,%ld,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g",
                  r.episode, r.slot, r.round, r.objective, r.total_energy_j, r.max_delay_s,
                  r.reward, r.total_iterations, r.success_count, r.mean_blur, r.global_loss);
    return buf;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw internal_error("metrics: cannot open '" + path + "' for writing");
    out << metrics_csv_header() << "\n";
    for (const MetricsRow& r : rows) out << metrics_csv_line(r) << "\n";
}

double RunResult::mean_reward() const {
    if (metrics.empty()) return 0.0;
    double s = 0.0;
    for (const MetricsRow& r : metrics) s += r.reward;
    return s / static_cast<double>(metrics.size());
}

double RunResult::mean_reward_last_episodes(int episodes) const {
    if (metrics.empty()) return 0.0;
    int last = metrics.back().episode;
    double s = 0.0;
    int n = 0;
    for (const MetricsRow& r : metrics) {
        if (r.episode > last - episodes) {
            s += r.reward;
            ++n;
        }
    }
    return n ? s / n : 0.0;
}

double RunResult::mean_objective() const {
    if (metrics.empty()) return 0.0;
    double s = 0.0;
    for (const MetricsRow& r : metrics) s += r.objective;
    return s / static_cast<double>(metrics.size());
}

double RunResult::objective_variance() const {
    if (metrics.size() < 2) return 0.0;
    double mean = mean_objective();
    double s = 0.0;
    for (const MetricsRow& r : metrics) s += (r.objective - mean) * (r.objective - mean);
    return s / static_cast<double>(metrics.size() - 1);
}

double RunResult::final_global_loss() const {
    return metrics.empty() ? 0.0 : metrics.back().global_loss;
}

Simulation::Simulation(RunConfig cfg, RunMode mode) : cfg_(std::move(cfg)), mode_(mode) {
    cfg_.validate();
    std::uint64_t seed = static_cast<std::uint64_t>(cfg_.seed);
    mobility_rng_ = Rng::stream(seed, "mobility");
    channel_rng_ = Rng::stream(seed, "channel");
    success_rng_ = Rng::stream(seed, "success");
    ssl_rng_ = Rng::stream(seed, "ssl");
    sac_rng_ = Rng::stream(seed, "sac");
    pso_rng_ = Rng::stream(seed, "pso");

    int n = cfg_.vehicles;
    vehicles_.reserve(n);
    prev_velocity_kmh_.resize(n);
    for (int i = 0; i < n; ++i) {
        vehicles_.push_back(spawn_vehicle(i, cfg_.mobility, mobility_rng_));
        prev_velocity_kmh_[i] = vehicles_[i].velocity_kmh;  // v_0, drives the first blur
    }

    centers_ = generate_centers(cfg_.simco, ssl_rng_);
    probe_ = sample_batch(cfg_.simco, centers_, cfg_.eval_samples, ssl_rng_);
    {
        ToyEncoder enc = ToyEncoder::make(cfg_.simco);
        enc.net.init_random(ssl_rng_);
        global_ = enc.to_params();
    }

    bounds_.lo.assign(n, cfg_.channel.p_min_w());
    bounds_.hi.assign(n, cfg_.channel.p_max_w());
    bounds_.lo.insert(bounds_.lo.end(), n, cfg_.compute.f_min_hz);
    bounds_.hi.insert(bounds_.hi.end(), n, cfg_.compute.f_max_hz);
    agent_.emplace(2 * n, bounds_, cfg_.sac, sac_rng_);

    realize_slot();
}

void Simulation::load_actor(const Checkpoint& ckpt) {
    MlpNet actor = net_from_section(ckpt.require("actor"));
    if (actor.dims() != agent_->actor().dims())
        throw internal_error("checkpoint: actor architecture does not match this config");
    agent_->actor() = actor;
    if (const CheckpointSection* s = ckpt.find("log_alpha"); s && !s->values.empty())
        agent_->set_log_alpha(s->values[0]);
}

void Simulation::realize_slot() {
    int n = cfg_.vehicles;
    realizations_.resize(n);
    for (int i = 0; i < n; ++i) {
        double d = distance_to_bs(vehicles_[i], cfg_.mobility);
        realizations_[i] = realize_channel(d, cfg_.channel, channel_rng_);
    }
    state_ = assemble_state();
}

std::vector<double> Simulation::assemble_state() const {
    int n = cfg_.vehicles;
    std::vector<double> s(2 * n);
    for (int i = 0; i < n; ++i) {
        s[i] = std::log10(realizations_[i].attenuation()) / cfg_.fading_norm_div;
        s[n + i] = vehicles_[i].velocity_kmh / cfg_.mobility.v_max_kmh;
    }
    return s;
}

Simulation::SlotAction Simulation::choose_action() {
    switch (mode_) {
        case RunMode::baseline_random_alloc: return random_action();
        case RunMode::baseline_pso: return pso_action();
        case RunMode::test: {
            SacAction a = agent_->select_action(state_, true, sac_rng_);
            int n = cfg_.vehicles;
            return {std::vector<double>(a.physical.begin(), a.physical.begin() + n),
                    std::vector<double>(a.physical.begin() + n, a.physical.end()), a.squashed};
        }
        default: {
            // uniform exploration until the replay holds warmup_slots transitions
            if (agent_->replay().size() < static_cast<std::size_t>(cfg_.warmup_slots))
                return random_action();
            SacAction a = agent_->select_action(state_, false, sac_rng_);
            int n = cfg_.vehicles;
            return {std::vector<double>(a.physical.begin(), a.physical.begin() + n),
                    std::vector<double>(a.physical.begin() + n, a.physical.end()), a.squashed};
        }
    }
}

Simulation::SlotAction Simulation::random_action() {
    int n = cfg_.vehicles;
    SlotAction act;
    act.powers_w.resize(n);
    act.frequencies_hz.resize(n);
    act.squashed.resize(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        double x = sac_rng_.uniform(bounds_.lo[i], bounds_.hi[i]);
        act.squashed[i] = 2.0 * (x - bounds_.lo[i]) / (bounds_.hi[i] - bounds_.lo[i]) - 1.0;
        if (i < n)
            act.powers_w[i] = x;
        else
            act.frequencies_hz[i - n] = x;
    }
    return act;
}

double Simulation::slot_reward_for(const std::vector<double>& powers,
                                   const std::vector<double>& freqs) const {
    int n = cfg_.vehicles;
    std::vector<NotationABCEF> notes(n);
    for (int i = 0; i < n; ++i)
        notes[i] = notations(powers[i], realizations_[i].gain, realizations_[i].interference_w,
                             cfg_.weights, cfg_.channel, cfg_.compute);
    KktBetaResult shares = kkt_beta(notes, freqs);

    AllocationAction action{powers, freqs, shares.betas};
    auto [value, bd] = objective(action, realizations_, cfg_.weights, cfg_.channel, cfg_.compute);

    std::vector<double> p_stars(n);
    for (int i = 0; i < n; ++i)
        p_stars[i] = p_star(realizations_[i].gain, realizations_[i].interference_w, cfg_.channel);
    return sac_reward(bd, p_stars, bd.iterations, cfg_.theta1, cfg_.theta2,
                      cfg_.channel.p_min_w());
}

Simulation::SlotAction Simulation::pso_action() {
    int n = cfg_.vehicles;
    int dim = 2 * n;
    auto to_physical = [&](std::span<const double> x) {
        SlotAction act;
        act.powers_w.resize(n);
        act.frequencies_hz.resize(n);
        act.squashed.resize(dim);
        for (int i = 0; i < dim; ++i) {
            double t = (x[i] - cfg_.pso.pos_min) / (cfg_.pso.pos_max - cfg_.pso.pos_min);
            double phys = bounds_.lo[i] + t * (bounds_.hi[i] - bounds_.lo[i]);
            act.squashed[i] = 2.0 * t - 1.0;
            if (i < n)
                act.powers_w[i] = phys;
            else
                act.frequencies_hz[i - n] = phys;
        }
        return act;
    };

    PsoObjective objective_fn = [&](std::span<const double> x) {
        SlotAction act = to_physical(x);
        return -slot_reward_for(act.powers_w, act.frequencies_hz);
    };
    PsoResult best = pso_optimize(objective_fn, dim, cfg_.pso, pso_rng_);
    return to_physical(best.best_position);
}

ModelParams Simulation::aggregate_round(const std::vector<ModelParams>& locals,
                                        const std::vector<BlurRecord>& records) {
    switch (mode_) {
        case RunMode::baseline_uniform_agg: {
            std::vector<int> successes(records.size());
            for (std::size_t i = 0; i < records.size(); ++i) successes[i] = records[i].success;
            return aggregate_uniform(locals, successes);
        }
        case RunMode::baseline_drop_agg:
            return aggregate_drop_blurred(locals, records, cfg_.drop_threshold_kmh);
        default:
            return aggregate_bfssl(locals, records);
    }
}

void Simulation::advance_vehicles() {
    for (int i = 0; i < cfg_.vehicles; ++i) {
        prev_velocity_kmh_[i] = vehicles_[i].velocity_kmh;
        vehicles_[i] = step_vehicle(vehicles_[i], cfg_.mobility, mobility_rng_);
        if (distance_to_bs(vehicles_[i], cfg_.mobility) > cfg_.mobility.exit_radius_m) {
            vehicles_[i] = spawn_vehicle(i, cfg_.mobility, mobility_rng_);
            prev_velocity_kmh_[i] = vehicles_[i].velocity_kmh;  // fresh v_0
        }
    }
}

RunResult Simulation::run() {
    RunResult result;
    int n = cfg_.vehicles;
    bool trains = mode_ == RunMode::train || mode_ == RunMode::baseline_uniform_agg ||
                  mode_ == RunMode::baseline_drop_agg;
    bool stores = trains;
    bool is_test = mode_ == RunMode::test;
    int updates_per_event = cfg_.updates_per_event > 0 ? cfg_.updates_per_event : cfg_.slots;

    int total_slots = is_test ? cfg_.test_slots : cfg_.episodes * cfg_.slots;
    int slots_done = 0;
    int max_episode = is_test ? (cfg_.test_slots + cfg_.slots - 1) / cfg_.slots : cfg_.episodes;

    for (int k = 1; k <= max_episode && slots_done < total_slots; ++k) {
        for (int t = 1; t <= cfg_.slots && slots_done < total_slots; ++t) {
            round_ = slot_to_round(k, t, cfg_.slots);
            SlotAction act = choose_action();

            // local training on data captured at the previous slot's velocity
            std::vector<ModelParams> locals(n);
            std::vector<int> iterations(n);
            for (int i = 0; i < n; ++i) {
                DataBatch batch =
                    sample_batch(cfg_.simco, centers_, cfg_.simco.samples_per_round, ssl_rng_);
                if (prev_velocity_kmh_[i] > cfg_.blur_velocity_threshold_kmh) {
                    batch = corrupt_fraction(batch, cfg_.corrupt_share, ssl_rng_,
                                             cfg_.corrupt_blend, cfg_.corrupt_noise_std)
                                .batch;
                }
                iterations[i] = iteration_count(act.frequencies_hz[i], cfg_.compute);
                locals[i] =
                    local_train(global_, batch, iterations[i], cfg_.simco, round_, ssl_rng_)
                        .params;
            }

            // upload with success draws
            std::vector<BlurRecord> records(n);
            int success_count = 0;
            double blur_sum = 0.0;
            for (int i = 0; i < n; ++i) {
                records[i].vehicle_id = i;
                records[i].velocity_kmh = prev_velocity_kmh_[i];
                records[i].blur = blur_level(prev_velocity_kmh_[i], cfg_.blur_coeff);
                records[i].success =
                    success_indicator(act.powers_w[i], realizations_[i].gain,
                                      realizations_[i].interference_w, cfg_.channel,
                                      success_rng_);
                success_count += records[i].success;
                blur_sum += records[i].blur;
            }

            try {
                global_ = aggregate_round(locals, records);
            } catch (const empty_round_error&) {
                ++empty_rounds_;  // keep the previous global model
            }

            // cost, reward, metrics
            std::vector<NotationABCEF> notes(n);
            for (int i = 0; i < n; ++i)
                notes[i] = notations(act.powers_w[i], realizations_[i].gain,
                                     realizations_[i].interference_w, cfg_.weights, cfg_.channel,
                                     cfg_.compute);
            KktBetaResult shares = kkt_beta(notes, act.frequencies_hz);
            AllocationAction full{act.powers_w, act.frequencies_hz, shares.betas};
            auto [value, bd] =
                objective(full, realizations_, cfg_.weights, cfg_.channel, cfg_.compute);
            std::vector<double> p_stars(n);
            for (int i = 0; i < n; ++i)
                p_stars[i] = p_star(realizations_[i].gain, realizations_[i].interference_w,
                                    cfg_.channel);
            double reward = sac_reward(bd, p_stars, bd.iterations, cfg_.theta1, cfg_.theta2,
                                       cfg_.channel.p_min_w());

            // Fresh identically-seeded stream every slot: the probe loss is a
            // deterministic function of the model alone.
            Rng eval_rng = Rng::stream(static_cast<std::uint64_t>(cfg_.seed), "eval");
            double global_loss = evaluate_loss(global_, probe_, cfg_.simco, eval_rng);

            MetricsRow row;
            row.episode = k;
            row.slot = t;
            row.round = round_;
            row.objective = value;
            row.total_energy_j = bd.total_energy_j;
            row.max_delay_s = bd.max_delay_s;
            row.reward = reward;
            for (int i = 0; i < n; ++i) row.total_iterations += bd.iterations[i];
            row.success_count = success_count;
            row.mean_blur = blur_sum / n;
            row.global_loss = global_loss;
            result.metrics.push_back(row);

            // advance the world and complete the transition
            std::vector<double> state_before = state_;
            advance_vehicles();
            realize_slot();
            if (stores) agent_->observe(Transition{state_before, act.squashed, reward, state_});
            ++slots_done;
        }

        bool warmed_up = agent_->replay().size() >= static_cast<std::size_t>(cfg_.warmup_slots);
        if (trains && warmed_up && k % cfg_.update_every == 0) {
            for (int u = 0; u < updates_per_event; ++u) {
                if (!agent_->ready_to_update()) break;
                agent_->update(sac_rng_);
                ++updates_done_;
            }
        }
    }

    result.global_model = global_;
    result.empty_rounds = empty_rounds_;
    result.update_iterations = updates_done_;
    return result;
}

Checkpoint Simulation::make_checkpoint() const {
    Checkpoint ckpt;
    add_net_section(ckpt, "actor", agent_->actor());
    add_net_section(ckpt, "critic1", agent_->critic1());
    add_net_section(ckpt, "critic2", agent_->critic2());
    add_net_section(ckpt, "target1", agent_->target1());
    add_net_section(ckpt, "target2", agent_->target2());
    ckpt.add("log_alpha", "", {agent_->log_alpha()});
    ToyEncoder enc = ToyEncoder::from_params(cfg_.simco, global_);
    ckpt.add("global_model", net_meta(enc.net), global_.values);
    return ckpt;
}

RunResult run_training(const RunConfig& cfg) {
    Simulation sim(cfg, RunMode::train);
    return sim.run();
}

RunResult run_test(const RunConfig& cfg, const Checkpoint& actor) {
    Simulation sim(cfg, RunMode::test);
    sim.load_actor(actor);
    return sim.run();
}

RunResult run_baseline(const RunConfig& cfg, const std::string& which) {
    RunMode mode = run_mode_from_name(which);
    if (mode == RunMode::train || mode == RunMode::test)
        throw config_error("baseline name must be pso|uniform-agg|drop-agg|random-alloc");
    Simulation sim(cfg, mode);
    return sim.run();
}

void write_summary_json(const RunConfig& cfg, RunMode mode, const RunResult& result,
                        const std::string& path) {
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));

    nlohmann::json j;
    j["mode"] = run_mode_name(mode);
    j["config_hash"] = hash_hex;
    j["seed"] = cfg.seed;
    j["vehicles"] = cfg.vehicles;
    j["episodes"] = cfg.episodes;
    j["slots"] = cfg.slots;
    j["rows"] = result.metrics.size();
    j["mean_reward"] = result.mean_reward();
    j["mean_reward_last_10_episodes"] = result.mean_reward_last_episodes(10);
    j["mean_objective"] = result.mean_objective();
    j["objective_variance"] = result.objective_variance();
    j["final_global_loss"] = result.final_global_loss();
    j["empty_rounds"] = result.empty_rounds;
    j["update_iterations"] = result.update_iterations;

    std::ofstream out(path);
    if (!out) throw internal_error("summary: cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

}  // namespace bfssl
